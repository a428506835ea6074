"""Requirements-document ingestion: goal model + scenarios, one JSON file.

Document shape (see schemas/requirements.schema.json):

    {
      "goals": [{"id": "...", "label": "...", "parent": "..."}, ...],
      "scenarios": [
        {"id": "...", "requirement": "...", "polarity": "valid" | "invalid",
         "body": [{"msg": "...", "from": "...", "to": "..."},
                  {"loop": {"min": 0, "max": 2, "body": [...]}}]}
      ]
    }

Exactly one goal has no parent; it is the final goal. Scenarios attach to
requirement leaves only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .diagnostics import ERROR, ParseDiagnostic, ParseError, WARNING
from .model import (
    ChoreographyModel,
    Defect,
    Goal,
    GoalModel,
    Loop,
    MessageEvent,
    POLARITIES,
    Scenario,
    ScenarioElement,
    goal_model_defects,
    requirements_of,
)

_GOAL_KEYS = {"id", "label", "parent"}
_SCENARIO_KEYS = {"id", "requirement", "polarity", "body"}
_EVENT_KEYS = {"msg", "from", "to"}
_LOOP_KEYS = {"min", "max", "body"}


@dataclass(frozen=True)
class RequirementsDoc:
    goal_model: GoalModel
    scenarios: tuple[Scenario, ...]


class _Collector:
    def __init__(self):
        self.diagnostics: list[ParseDiagnostic] = []

    def error(self, code: str, location: str, message: str, line: int | None = None) -> None:
        self.diagnostics.append(ParseDiagnostic(ERROR, code, location, message, line))

    def warning(self, code: str, location: str, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(WARNING, code, location, message))

    @property
    def failed(self) -> bool:
        return any(d.severity == ERROR for d in self.diagnostics)


def parse_requirements(data: bytes) -> tuple[RequirementsDoc, list[ParseDiagnostic]]:
    """Parse a requirements document.

    Returns the document plus warning diagnostics; raises ParseError with
    the complete diagnostic list when anything error-severity is found.
    The returned goal model satisfies every goal-model invariant and every
    scenario is well-formed and bound to a requirement leaf.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    out = _Collector()
    try:
        root = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        out.error("MalformedDocument", "document", f"not valid UTF-8: {exc}")
        raise ParseError(out.diagnostics) from None
    except json.JSONDecodeError as exc:
        out.error("MalformedDocument", "document", f"not valid JSON: {exc.msg}", line=exc.lineno)
        raise ParseError(out.diagnostics) from None

    if not isinstance(root, dict):
        out.error("MalformedDocument", "document", "top level must be an object")
        raise ParseError(out.diagnostics)
    for key in sorted(set(root) - {"goals", "scenarios"}):
        out.warning("UnrecognizedKey", key, f"top-level key '{key}' is not interpreted")

    goal_model = _parse_goals(root.get("goals"), out)
    scenarios = _parse_scenarios(root.get("scenarios"), goal_model, out)

    if out.failed or goal_model is None:
        raise ParseError(out.diagnostics)
    return RequirementsDoc(goal_model=goal_model, scenarios=tuple(scenarios)), out.diagnostics


def _parse_goals(raw, out: _Collector) -> GoalModel | None:
    if not isinstance(raw, list):
        out.error("MalformedDocument", "goals", "'goals' must be a list of goal objects")
        return None
    goals: list[Goal] = []
    edges: list[tuple[str, str]] = []
    roots: list[str] = []
    for i, item in enumerate(raw):
        where = f"goals[{i}]"
        if not isinstance(item, dict):
            out.error("MalformedDocument", where, "goal entries must be objects")
            continue
        for key in sorted(set(item) - _GOAL_KEYS):
            out.warning("UnrecognizedKey", where, f"goal key '{key}' is not interpreted")
        goal_id = item.get("id")
        if not isinstance(goal_id, str) or not goal_id:
            out.error("MalformedDocument", where, "goal 'id' must be a non-empty string")
            continue
        label = item.get("label", "")
        if not isinstance(label, str):
            out.error("MalformedDocument", where, "goal 'label' must be a string")
            label = ""
        parent = item.get("parent")
        if parent is not None and not isinstance(parent, str):
            out.error("MalformedDocument", where, "goal 'parent' must be a string or null")
            continue
        goals.append(Goal(id=goal_id, label=label))
        if parent is None:
            roots.append(goal_id)
        else:
            edges.append((parent, goal_id))
    if out.failed:
        return None
    if len(roots) != 1:
        out.error(
            "MalformedDocument",
            "goals",
            f"exactly one goal must have no parent (the final goal), found {len(roots)}"
            + (f": {', '.join(roots)}" if roots else ""),
        )
        return None
    for defect in goal_model_defects(goals, roots[0], edges):
        out.error(defect.code, "goals", defect.message)
    if out.failed:
        return None
    return GoalModel(goals=tuple(goals), final_goal=roots[0], edges=tuple(edges))


def _parse_scenarios(raw, goal_model: GoalModel | None, out: _Collector) -> list[Scenario]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        out.error("MalformedDocument", "scenarios", "'scenarios' must be a list of scenario objects")
        return []
    leaves = set(requirements_of(goal_model)) if goal_model else None
    scenarios: list[Scenario] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(raw):
        where = f"scenarios[{i}]"
        if not isinstance(item, dict):
            out.error("MalformedDocument", where, "scenario entries must be objects")
            continue
        for key in sorted(set(item) - _SCENARIO_KEYS):
            out.warning("UnrecognizedKey", where, f"scenario key '{key}' is not interpreted")
        sid = item.get("id")
        if not isinstance(sid, str) or not sid:
            out.error("MalformedDocument", where, "scenario 'id' must be a non-empty string")
            continue
        if sid in seen_ids:
            out.error("DuplicateScenarioId", where, f"scenario id '{sid}' is used more than once")
            continue
        seen_ids.add(sid)
        requirement = item.get("requirement")
        if not isinstance(requirement, str) or not requirement:
            out.error("MalformedDocument", where, f"scenario '{sid}' needs a 'requirement' string")
            continue
        if leaves is not None and requirement not in leaves:
            out.error(
                "ScenarioForNonRequirement",
                where,
                f"scenario '{sid}' is attached to '{requirement}', which is not a requirement leaf",
            )
            continue
        polarity = item.get("polarity")
        if polarity not in POLARITIES:
            out.error("MalformedDocument", where, f"scenario '{sid}' polarity must be 'valid' or 'invalid'")
            continue
        body = _parse_body(item.get("body"), f"{where}.body", out)
        if body is None:
            continue
        scenarios.append(Scenario(id=sid, requirement=requirement, polarity=polarity, body=body))
    return scenarios


def _parse_body(raw, where: str, out: _Collector) -> tuple[ScenarioElement, ...] | None:
    if not isinstance(raw, list):
        out.error("MalformedDocument", where, "scenario body must be a list")
        return None
    elements: list[ScenarioElement] = []
    ok = True
    for i, item in enumerate(raw):
        el_where = f"{where}[{i}]"
        if not isinstance(item, dict):
            out.error("MalformedDocument", el_where, "body elements must be objects")
            ok = False
        elif "msg" in item:
            event = _parse_event(item, el_where, out)
            if event is None:
                ok = False
            else:
                elements.append(event)
        elif "loop" in item:
            loop = _parse_loop(item, el_where, out)
            if loop is None:
                ok = False
            else:
                elements.append(loop)
        else:
            out.error("MalformedDocument", el_where, "body elements must carry 'msg' or 'loop'")
            ok = False
    return tuple(elements) if ok else None


def _parse_event(item: dict, where: str, out: _Collector) -> MessageEvent | None:
    for key in sorted(set(item) - _EVENT_KEYS):
        out.warning("UnrecognizedKey", where, f"interaction key '{key}' is not interpreted")
    msg, sender, receiver = item.get("msg"), item.get("from"), item.get("to")
    for field, value in (("msg", msg), ("from", sender), ("to", receiver)):
        if not isinstance(value, str) or not value:
            out.error("MalformedDocument", where, f"interaction '{field}' must be a non-empty string")
            return None
    if sender == receiver:
        out.error("SelfMessage", where, f"interaction '{msg}' has identical sender and receiver '{sender}'")
        return None
    return MessageEvent(message=msg, sender=sender, receiver=receiver)


def _parse_loop(item: dict, where: str, out: _Collector) -> Loop | None:
    for key in sorted(set(item) - {"loop"}):
        out.warning("UnrecognizedKey", where, f"loop element key '{key}' is not interpreted")
    spec = item["loop"]
    if not isinstance(spec, dict):
        out.error("MalformedDocument", where, "'loop' must be an object")
        return None
    for key in sorted(set(spec) - _LOOP_KEYS):
        out.warning("UnrecognizedKey", where, f"loop key '{key}' is not interpreted")
    lo, hi = spec.get("min"), spec.get("max")
    for field, value in (("min", lo), ("max", hi)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            out.error("MalformedDocument", where, f"loop '{field}' must be a non-negative integer")
            return None
    if lo > hi:
        out.error("BadLoopBounds", where, f"loop min ({lo}) exceeds max ({hi})")
        return None
    body = _parse_body(spec.get("body"), f"{where}.loop.body", out)
    if body is None:
        return None
    if not body:
        out.error("MalformedDocument", where, "loop body must not be empty")
        return None
    return Loop(min_reps=lo, max_reps=hi, body=body)


def bind_participants(doc: RequirementsDoc, model: ChoreographyModel) -> list[Defect]:
    """Check that every participant named in any scenario exists in the
    choreography model. Returns one defect per offending event role."""
    defects: list[Defect] = []
    for scenario in doc.scenarios:
        for index, event in enumerate(_iter_events(scenario.body)):
            for name in (event.sender, event.receiver):
                if name not in model.participants:
                    defects.append(
                        Defect(
                            "UnknownScenarioParticipant",
                            f"scenario '{scenario.id}' event {index} ('{event.message}'): "
                            f"participant '{name}' is not in the model",
                        )
                    )
    return defects


def _iter_events(body: tuple[ScenarioElement, ...]):
    for element in body:
        if isinstance(element, MessageEvent):
            yield element
        else:
            yield from _iter_events(element.body)


def requirements_to_document(doc: RequirementsDoc) -> dict:
    """Serialize back to the document shape; parse(serialize(doc)) == doc."""
    parent_of = {child: parent for parent, child in doc.goal_model.edges}
    goals = []
    for goal in doc.goal_model.goals:
        entry: dict = {"id": goal.id}
        if goal.label:
            entry["label"] = goal.label
        if goal.id in parent_of:
            entry["parent"] = parent_of[goal.id]
        goals.append(entry)
    return {
        "goals": goals,
        "scenarios": [
            {
                "id": s.id,
                "requirement": s.requirement,
                "polarity": s.polarity,
                "body": _body_to_document(s.body),
            }
            for s in doc.scenarios
        ],
    }


def _body_to_document(body: tuple[ScenarioElement, ...]) -> list[dict]:
    result = []
    for element in body:
        if isinstance(element, MessageEvent):
            result.append({"msg": element.message, "from": element.sender, "to": element.receiver})
        else:
            result.append(
                {
                    "loop": {
                        "min": element.min_reps,
                        "max": element.max_reps,
                        "body": _body_to_document(element.body),
                    }
                }
            )
    return result
