"""Domain types for goal models, scenarios, and choreography models.

Everything here is an immutable value object (frozen dataclasses over
tuples/frozensets), so instances are hashable, comparable, and safe to
share across threads. Well-formedness checking is exhaustive: validators
collect every defect they can find instead of stopping at the first one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

VALID = "valid"
INVALID = "invalid"
POLARITIES = (VALID, INVALID)


@dataclass(frozen=True)
class Defect:
    """One well-formedness violation, identified by a stable code."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class InvalidModelError(Exception):
    """Raised by constructors/validators; carries the complete defect list."""

    def __init__(self, defects: Iterable[Defect]):
        self.defects = tuple(defects)
        super().__init__("; ".join(str(d) for d in self.defects))


# ---------------------------------------------------------------------------
# Goal model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Goal:
    id: str
    label: str = ""


@dataclass(frozen=True)
class GoalModel:
    """A refinement tree of goals. The root is the final goal; the leaves
    are the requirements that scenarios attach to."""

    goals: tuple[Goal, ...]
    final_goal: str
    edges: tuple[tuple[str, str], ...]

    def goal_ids(self) -> frozenset[str]:
        return frozenset(g.id for g in self.goals)


def goal_model_defects(
    goals: Iterable[Goal],
    final_goal: str,
    edges: Iterable[tuple[str, str]],
) -> list[Defect]:
    """Collect every structural defect of the described goal graph.

    An empty result means ``GoalModel(goals, final_goal, edges)`` satisfies
    all invariants: a tree rooted at the final goal, every goal reachable,
    at least two goals.
    """
    goals = tuple(goals)
    edges = tuple(dict.fromkeys(edges))
    defects: list[Defect] = []

    seen: set[str] = set()
    for g in goals:
        if g.id in seen:
            defects.append(Defect("DuplicateGoalId", f"goal id '{g.id}' declared more than once"))
        seen.add(g.id)
    ids = seen

    if final_goal not in ids:
        defects.append(Defect("UnknownFinalGoal", f"final goal '{final_goal}' is not a declared goal"))
    if len(ids) < 2:
        defects.append(Defect("Degenerate", f"a goal model needs at least 2 goals, got {len(ids)}"))

    usable: list[tuple[str, str]] = []
    for parent, child in edges:
        missing = [x for x in (parent, child) if x not in ids]
        if missing:
            defects.append(
                Defect(
                    "UnknownEdgeEndpoint",
                    f"edge ({parent}, {child}) references undeclared goal(s): {', '.join(missing)}",
                )
            )
        else:
            usable.append((parent, child))

    parents: dict[str, list[str]] = {}
    children: dict[str, list[str]] = {}
    for parent, child in usable:
        parents.setdefault(child, []).append(parent)
        children.setdefault(parent, []).append(child)

    for child, ps in sorted(parents.items()):
        if len(ps) > 1:
            defects.append(
                Defect("NotATree", f"goal '{child}' has {len(ps)} parents: {', '.join(sorted(ps))}")
            )

    cycle = _find_cycle(ids, children)
    if cycle:
        defects.append(Defect("NotATree", "cycle through goals: " + " -> ".join(cycle)))

    if final_goal in ids:
        if final_goal in parents:
            defects.append(
                Defect("NotATree", f"final goal '{final_goal}' has a parent ({parents[final_goal][0]})")
            )
        reached = {final_goal}
        frontier = [final_goal]
        while frontier:
            node = frontier.pop()
            for nxt in children.get(node, ()):
                if nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        for goal_id in sorted(ids - reached):
            defects.append(Defect("Unreachable", f"goal '{goal_id}' is not reachable from the final goal"))

    return defects


def _find_cycle(ids: set[str], children: dict[str, list[str]]) -> Optional[list[str]]:
    """Return one directed cycle as a node list (first == last), or None."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in ids}
    stack: list[str] = []

    def visit(node: str) -> Optional[list[str]]:
        color[node] = GRAY
        stack.append(node)
        for nxt in children.get(node, ()):
            if color[nxt] == GRAY:
                return stack[stack.index(nxt):] + [nxt]
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for start in sorted(ids):
        if color[start] == WHITE:
            found = visit(start)
            if found:
                return found
    return None


def validate_goal_model(
    goals: Iterable[Goal],
    final_goal: str,
    edges: Iterable[tuple[str, str]],
) -> GoalModel:
    """Build a GoalModel or raise InvalidModelError with every defect found."""
    goals = tuple(goals)
    edges = tuple(dict.fromkeys(edges))
    defects = goal_model_defects(goals, final_goal, edges)
    if defects:
        raise InvalidModelError(defects)
    return GoalModel(goals=goals, final_goal=final_goal, edges=edges)


def requirements_of(model: GoalModel) -> list[str]:
    """The requirement leaves (goals with no children), sorted by id."""
    with_children = {parent for parent, _ in model.edges}
    return sorted(g.id for g in model.goals if g.id not in with_children)


# ---------------------------------------------------------------------------
# Message events, traces, scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class MessageEvent:
    """One observable message exchange: (message, sender, receiver).

    This triple is the whole event identity; matching is exact and
    case-sensitive. Ordering is lexicographic on the triple, which gives
    traces a canonical shortlex order.
    """

    message: str
    sender: str
    receiver: str

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError(f"self-message: '{self.message}' from and to '{self.sender}'")

    def __str__(self) -> str:
        return f"{self.message} {self.sender}->{self.receiver}"


Trace = tuple[MessageEvent, ...]


def trace_key(trace: Trace) -> tuple:
    """Shortlex sort key: length first, then event triples."""
    return (len(trace), trace)


def format_trace(trace: Trace) -> str:
    return "; ".join(str(e) for e in trace) if trace else "(empty)"


@dataclass(frozen=True)
class Loop:
    """Bounded repetition of a scenario segment."""

    min_reps: int
    max_reps: int
    body: tuple["ScenarioElement", ...]

    def __post_init__(self):
        if not (0 <= self.min_reps <= self.max_reps):
            raise ValueError(f"loop bounds must satisfy 0 <= min <= max, got [{self.min_reps}, {self.max_reps}]")
        if not self.body:
            raise ValueError("loop body must not be empty")


ScenarioElement = Union[MessageEvent, Loop]


@dataclass(frozen=True)
class Scenario:
    """A polarity-tagged interaction sequence attached to a requirement.

    polarity 'valid' means the model must admit every expansion of the
    scenario; 'invalid' means it must admit none.
    """

    id: str
    requirement: str
    polarity: str
    body: tuple[ScenarioElement, ...]

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got '{self.polarity}'")


# ---------------------------------------------------------------------------
# Choreography model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StartEvent:
    id: str


@dataclass(frozen=True)
class EndEvent:
    id: str


@dataclass(frozen=True)
class ExclusiveGateway:
    id: str


@dataclass(frozen=True)
class ParallelGateway:
    id: str


@dataclass(frozen=True)
class LoopMarker:
    """Standard loop marker on a task. test_before=True allows zero
    executions (while-loop), test_before=False requires at least one."""

    test_before: bool


@dataclass(frozen=True)
class ChoreographyTask:
    """One atomic exchange between two participants: an initiating message
    and, for two-way tasks, a return message."""

    id: str
    initiating_link: str
    return_link: Optional[str] = None
    loop: Optional[LoopMarker] = None
    name: str = ""


Node = Union[StartEvent, EndEvent, ExclusiveGateway, ParallelGateway, ChoreographyTask]


@dataclass(frozen=True)
class MessageLink:
    """A named message between two distinct participants. The sending and
    receiving activity both resolve to the task that owns the exchange."""

    id: str
    message: str
    sender: str
    receiver: str
    sending_activity: str = ""
    receiving_activity: str = ""


@dataclass(frozen=True)
class ChoreographyModel:
    name: str
    participants: frozenset[str]
    nodes: tuple[Node, ...]
    flows: tuple[tuple[str, str], ...]
    links: tuple[MessageLink, ...]

    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def link_map(self) -> dict[str, MessageLink]:
        return {l.id: l for l in self.links}


def validate_choreography(model: ChoreographyModel) -> list[Defect]:
    """Collect every structural defect; an empty list means the model is
    well-formed (single start, connected, sane arities, consistent links)."""
    defects: list[Defect] = []
    nodes = model.nodes
    node_ids: set[str] = set()
    for n in nodes:
        if n.id in node_ids:
            defects.append(Defect("DuplicateNodeId", f"node id '{n.id}' declared more than once"))
        node_ids.add(n.id)

    starts = [n for n in nodes if isinstance(n, StartEvent)]
    ends = [n for n in nodes if isinstance(n, EndEvent)]
    if not starts:
        defects.append(Defect("NoStartEvent", "model has no start event"))
    elif len(starts) > 1:
        defects.append(
            Defect("MultipleStartEvents", "expected exactly one start event, got: " + ", ".join(s.id for s in starts))
        )
    if not ends:
        defects.append(Defect("NoEndEvent", "model has no end event"))

    seen_flows: set[tuple[str, str]] = set()
    usable_flows: list[tuple[str, str]] = []
    for src, dst in model.flows:
        if (src, dst) in seen_flows:
            defects.append(Defect("DuplicateFlow", f"sequence flow ({src}, {dst}) declared more than once"))
            continue
        seen_flows.add((src, dst))
        missing = [x for x in (src, dst) if x not in node_ids]
        if missing:
            defects.append(
                Defect("DanglingFlowEndpoint", f"sequence flow ({src}, {dst}) references unknown node(s): {', '.join(missing)}")
            )
        else:
            usable_flows.append((src, dst))

    incoming: dict[str, list[str]] = {n.id: [] for n in nodes}
    outgoing: dict[str, list[str]] = {n.id: [] for n in nodes}
    for src, dst in usable_flows:
        outgoing[src].append(dst)
        incoming[dst].append(src)

    for n in nodes:
        n_in, n_out = len(incoming[n.id]), len(outgoing[n.id])
        if isinstance(n, StartEvent) and n_in:
            defects.append(Defect("BadEventFlow", f"start event '{n.id}' has incoming flow"))
        if isinstance(n, EndEvent) and n_out:
            defects.append(Defect("BadEventFlow", f"end event '{n.id}' has outgoing flow"))
        if isinstance(n, ChoreographyTask) and (n_in, n_out) != (1, 1):
            defects.append(
                Defect("BadTaskArity", f"task '{n.id}' must have exactly 1 incoming and 1 outgoing flow, got {n_in} in / {n_out} out")
            )
        if isinstance(n, (ExclusiveGateway, ParallelGateway)):
            split = n_in == 1 and n_out >= 2
            merge = n_in >= 2 and n_out == 1
            if not (split or merge):
                defects.append(
                    Defect("BadGatewayArity", f"gateway '{n.id}' must be a split (1 in, >=2 out) or a merge (>=2 in, 1 out), got {n_in} in / {n_out} out")
                )

    # Connectivity: every node on some start -> end path.
    if len(starts) == 1:
        fwd = _closure([starts[0].id], outgoing)
        bwd = _closure([e.id for e in ends], incoming)
        for n in nodes:
            if n.id not in fwd or n.id not in bwd:
                defects.append(Defect("OrphanNode", f"node '{n.id}' lies on no start->end path"))

    link_ids: set[str] = set()
    for link in model.links:
        if link.id in link_ids:
            defects.append(Defect("DuplicateLinkId", f"message link id '{link.id}' declared more than once"))
        link_ids.add(link.id)
        if link.sender == link.receiver:
            defects.append(Defect("SelfMessage", f"link '{link.id}' has sender == receiver == '{link.sender}'"))
        for role, name in (("sender", link.sender), ("receiver", link.receiver)):
            if name not in model.participants:
                defects.append(Defect("UnknownParticipant", f"link '{link.id}' {role} '{name}' is not a participant"))

    referenced: dict[str, list[str]] = {}
    for n in nodes:
        if not isinstance(n, ChoreographyTask):
            continue
        refs = [n.initiating_link] + ([n.return_link] if n.return_link else [])
        for ref in refs:
            if ref not in link_ids:
                defects.append(Defect("DanglingLinkRef", f"task '{n.id}' references unknown message link '{ref}'"))
            else:
                referenced.setdefault(ref, []).append(n.id)

    for link in model.links:
        owners = referenced.get(link.id, [])
        if len(owners) == 0:
            defects.append(Defect("UnreferencedLink", f"message link '{link.id}' is referenced by no task"))
        elif len(owners) > 1:
            defects.append(
                Defect("SharedLinkRef", f"message link '{link.id}' is referenced by several tasks: {', '.join(owners)}")
            )
        elif {link.sending_activity, link.receiving_activity} != {owners[0]}:
            defects.append(
                Defect("LinkActivityMismatch", f"link '{link.id}' activities must both be its owning task '{owners[0]}'")
            )

    return defects


def _closure(seeds: Iterable[str], adjacency: dict[str, list[str]]) -> set[str]:
    reached = set(seeds)
    frontier = list(reached)
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    return reached


# ---------------------------------------------------------------------------
# Confusion matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        for field_name in ("tp", "fn", "fp", "tn"):
            if getattr(self, field_name) < 0:
                raise ValueError(f"{field_name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn
