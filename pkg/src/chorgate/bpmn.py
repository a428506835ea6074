"""BPMN 2.0 choreography XML ingestion.

Reads the interaction-modeling subset of BPMN 2.0 (choreography tasks,
exclusive/parallel gateways, start/end events, sequence flows, message
flows) and produces a ChoreographyModel. Parsing never drops anything
silently: unrecognized elements become warnings, and elements that would
change control flow in ways this tool cannot honor (event-based or
inclusive gateways, sub-choreographies, ...) are hard errors.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.parsers import expat

from .diagnostics import ERROR, WARNING, ParseDiagnostic, ParseError
from .model import (
    ChoreographyModel,
    ChoreographyTask,
    EndEvent,
    ExclusiveGateway,
    LoopMarker,
    MessageLink,
    Node,
    ParallelGateway,
    StartEvent,
    validate_choreography,
)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

# Elements we would have to interpret to get control flow right, but don't.
_FLOW_ALTERING = {
    "inclusiveGateway",
    "complexGateway",
    "eventBasedGateway",
    "subChoreography",
    "callChoreography",
    "intermediateCatchEvent",
    "intermediateThrowEvent",
    "boundaryEvent",
}

def _tag(local: str) -> str:
    return f"{{{BPMN_NS}}}{local}"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if tag.startswith("{") else tag


def _loc(elem: ET.Element) -> str:
    local = _local(elem.tag)
    elem_id = elem.get("id")
    return f"{local}#{elem_id}" if elem_id else local


def _element_lines(data: bytes, root: ET.Element) -> dict[int, int]:
    """Map id(element) -> 1-based source line, via a second expat pass.

    Both ElementTree and raw expat see start tags in document order, so the
    two sequences zip together.
    """
    lines: list[int] = []
    parser = expat.ParserCreate()
    parser.StartElementHandler = lambda *_: lines.append(parser.CurrentLineNumber)
    try:
        parser.Parse(data, True)
    except expat.ExpatError:
        return {}
    elems = list(root.iter())
    if len(elems) != len(lines):
        return {}
    return {id(e): line for e, line in zip(elems, lines)}


class _Collector:
    def __init__(self, lines: dict[int, int]):
        self.diagnostics: list[ParseDiagnostic] = []
        self._lines = lines

    def error(self, code: str, elem, message: str) -> None:
        self._add(ERROR, code, elem, message)

    def warning(self, code: str, elem, message: str) -> None:
        self._add(WARNING, code, elem, message)

    def _add(self, severity: str, code: str, elem, message: str) -> None:
        if isinstance(elem, ET.Element):
            location, line = _loc(elem), self._lines.get(id(elem))
        else:
            location, line = str(elem), None
        self.diagnostics.append(ParseDiagnostic(severity, code, location, message, line))

    @property
    def failed(self) -> bool:
        return any(d.severity == ERROR for d in self.diagnostics)


def parse_choreography(data: bytes) -> tuple[ChoreographyModel, list[ParseDiagnostic]]:
    """Parse a BPMN 2.0 choreography document.

    Returns the model plus any warning diagnostics. Raises ParseError with
    the complete diagnostic list if anything error-severity turned up; the
    returned model is guaranteed to pass validate_choreography.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line = exc.position[0] if getattr(exc, "position", None) else None
        raise ParseError(
            [ParseDiagnostic(ERROR, "MalformedXml", "document", f"not well-formed XML: {exc}", line)]
        ) from None

    out = _Collector(_element_lines(data, root))

    if root.tag != _tag("definitions"):
        out.error("MissingDefinitions", root, f"document root must be BPMN definitions, got <{_local(root.tag)}>")
        raise ParseError(out.diagnostics)

    choreographies = [e for e in root if e.tag == _tag("choreography")]
    if not choreographies:
        out.error("MissingDefinitions", root, "definitions contain no choreography element")
        raise ParseError(out.diagnostics)
    for extra in choreographies[1:]:
        out.warning("UnrecognizedElement", extra, "only the first choreography is interpreted")
    chor = choreographies[0]

    messages: dict[str, str] = {}
    seen_ids: set[str] = set()

    def claim_id(elem: ET.Element) -> str | None:
        elem_id = elem.get("id")
        if not elem_id:
            out.error("MissingAttribute", elem, f"<{_local(elem.tag)}> requires an id attribute")
            return None
        if elem_id in seen_ids:
            out.error("DuplicateId", elem, f"id '{elem_id}' is used by more than one element")
            return None
        seen_ids.add(elem_id)
        return elem_id

    for elem in root:
        if elem.tag == _tag("choreography"):
            continue
        if elem.tag == _tag("message"):
            msg_id = claim_id(elem)
            if msg_id:
                messages[msg_id] = elem.get("name") or msg_id
        else:
            out.warning("UnrecognizedElement", elem, f"<{_local(elem.tag)}> under definitions is not interpreted")

    participants: dict[str, str] = {}  # participant id -> display name
    raw_flows: list[dict] = []  # messageFlow records, document order
    node_entries: list = []  # Node instances or raw task records, document order
    raw_seq: list[ET.Element] = []

    for elem in chor:
        local = _local(elem.tag)
        if elem.tag == _tag("participant"):
            part_id = claim_id(elem)
            if part_id:
                name = elem.get("name") or part_id
                if name in participants.values():
                    out.error("DuplicateParticipant", elem, f"participant name '{name}' is used more than once")
                else:
                    participants[part_id] = name
        elif elem.tag == _tag("messageFlow"):
            flow_id = claim_id(elem)
            if flow_id:
                raw_flows.append(
                    {
                        "id": flow_id,
                        "source": elem.get("sourceRef"),
                        "target": elem.get("targetRef"),
                        "message": elem.get("messageRef"),
                        "name": elem.get("name"),
                        "elem": elem,
                    }
                )
        elif elem.tag == _tag("startEvent"):
            node_id = claim_id(elem)
            if node_id:
                node_entries.append(StartEvent(node_id))
        elif elem.tag == _tag("endEvent"):
            node_id = claim_id(elem)
            if node_id:
                node_entries.append(EndEvent(node_id))
        elif elem.tag == _tag("exclusiveGateway"):
            node_id = claim_id(elem)
            if node_id:
                node_entries.append(ExclusiveGateway(node_id))
        elif elem.tag == _tag("parallelGateway"):
            node_id = claim_id(elem)
            if node_id:
                node_entries.append(ParallelGateway(node_id))
        elif elem.tag == _tag("choreographyTask"):
            node_id = claim_id(elem)
            if node_id:
                node_entries.append(_read_task(node_id, elem, out))
        elif elem.tag == _tag("sequenceFlow"):
            if claim_id(elem):
                raw_seq.append(elem)
        elif local in _FLOW_ALTERING:
            out.error("UnsupportedElement", elem, f"<{local}> changes control flow and is not supported")
        else:
            out.warning("UnrecognizedElement", elem, f"<{local}> inside choreography is not interpreted")

    # Resolve message flows against participants and messages.
    flow_records: dict[str, dict] = {}
    for rec in raw_flows:
        ok = True
        for attr in ("source", "target"):
            ref = rec[attr]
            if ref is None:
                out.error("MissingAttribute", rec["elem"], f"messageFlow '{rec['id']}' lacks {attr}Ref")
                ok = False
            elif ref not in participants:
                out.error("DanglingReference", rec["elem"], f"messageFlow '{rec['id']}' {attr}Ref '{ref}' is not a participant")
                ok = False
        if rec["message"] is not None and rec["message"] not in messages:
            out.error("DanglingReference", rec["elem"], f"messageFlow '{rec['id']}' messageRef '{rec['message']}' matches no message")
            ok = False
        if ok:
            flow_records[rec["id"]] = rec

    # Resolve tasks in place: pick initiating/return flow, attach loop markers.
    owner_of_flow: dict[str, str] = {}
    nodes: list[Node] = []
    for entry in node_entries:
        if isinstance(entry, dict):
            node = _resolve_task(entry, flow_records, participants, owner_of_flow, out)
            if node is not None:
                nodes.append(node)
        else:
            nodes.append(entry)

    links: list[MessageLink] = []
    for rec in raw_flows:
        if rec["id"] not in flow_records:
            continue
        owner = owner_of_flow.get(rec["id"], "")
        if rec["message"] is not None:
            message_name = messages[rec["message"]]
        else:
            message_name = rec["name"] or rec["id"]
        links.append(
            MessageLink(
                id=rec["id"],
                message=message_name,
                sender=participants[rec["source"]],
                receiver=participants[rec["target"]],
                sending_activity=owner,
                receiving_activity=owner,
            )
        )

    node_ids = {n.id for n in nodes}
    flows: list[tuple[str, str]] = []
    for elem in raw_seq:
        src, dst = elem.get("sourceRef"), elem.get("targetRef")
        ok = True
        for attr, ref in (("sourceRef", src), ("targetRef", dst)):
            if ref is None:
                out.error("MissingAttribute", elem, f"sequenceFlow lacks {attr}")
                ok = False
            elif ref not in node_ids:
                out.error("DanglingReference", elem, f"sequenceFlow {attr} '{ref}' matches no flow node")
                ok = False
        if ok and (src, dst) in flows:
            out.error("DuplicateFlow", elem, f"a second sequence flow from '{src}' to '{dst}' cannot be represented")
            ok = False
        if ok:
            flows.append((src, dst))

    if out.failed:
        raise ParseError(out.diagnostics)

    model = ChoreographyModel(
        name=chor.get("name") or chor.get("id") or "choreography",
        participants=frozenset(participants.values()),
        nodes=tuple(nodes),
        flows=tuple(flows),
        links=tuple(links),
    )

    for defect in validate_choreography(model):
        out.error(defect.code, "model", defect.message)
    if out.failed:
        raise ParseError(out.diagnostics)
    return model, out.diagnostics


def _read_task(node_id: str, elem: ET.Element, out: _Collector) -> dict:
    record = {
        "id": node_id,
        "name": elem.get("name") or "",
        "initiator": elem.get("initiatingParticipantRef"),
        "participant_refs": [],
        "flow_refs": [],
        "loop": None,
        "elem": elem,
    }
    for child in elem:
        local = _local(child.tag)
        if child.tag == _tag("participantRef"):
            record["participant_refs"].append((child.text or "").strip())
        elif child.tag == _tag("messageFlowRef"):
            record["flow_refs"].append((child.text or "").strip())
        elif child.tag == _tag("standardLoopCharacteristics"):
            test_before = (child.get("testBefore") or "false").lower() in ("true", "1")
            record["loop"] = LoopMarker(test_before=test_before)
        else:
            out.warning("UnrecognizedElement", child, f"<{local}> inside choreographyTask is not interpreted")
    return record


def _resolve_task(
    task: dict,
    flow_records: dict[str, dict],
    participants: dict[str, str],
    owner_of_flow: dict[str, str],
    out: _Collector,
) -> ChoreographyTask | None:
    elem = task["elem"]
    ok = True

    initiator = task["initiator"]
    if initiator is None:
        out.error("MissingAttribute", elem, f"choreographyTask '{task['id']}' lacks initiatingParticipantRef")
        ok = False
    elif initiator not in participants:
        out.error("DanglingReference", elem, f"initiatingParticipantRef '{initiator}' is not a participant")
        ok = False

    for ref in task["participant_refs"]:
        if ref not in participants:
            out.error("DanglingReference", elem, f"participantRef '{ref}' is not a participant")
            ok = False

    refs = task["flow_refs"]
    if not 1 <= len(refs) <= 2:
        out.error(
            "BadTaskMessageFlows",
            elem,
            f"choreographyTask '{task['id']}' must reference 1 or 2 message flows, got {len(refs)}",
        )
        return None
    resolved = []
    for ref in refs:
        if ref not in flow_records:
            out.error("DanglingReference", elem, f"messageFlowRef '{ref}' matches no messageFlow")
            ok = False
        else:
            resolved.append(flow_records[ref])
    if not ok:
        return None

    sent_by_initiator = [rec for rec in resolved if rec["source"] == initiator]
    if len(sent_by_initiator) != 1:
        out.error(
            "BadInitiatingFlow",
            elem,
            f"choreographyTask '{task['id']}': exactly one referenced message flow must be sent by the "
            f"initiating participant, got {len(sent_by_initiator)}",
        )
        return None
    initiating = sent_by_initiator[0]
    returning = next((rec for rec in resolved if rec is not initiating), None)

    for rec in resolved:
        if rec["id"] in owner_of_flow:
            out.error(
                "SharedLinkRef",
                elem,
                f"messageFlow '{rec['id']}' is already owned by task '{owner_of_flow[rec['id']]}'",
            )
            return None
        owner_of_flow[rec["id"]] = task["id"]

    return ChoreographyTask(
        id=task["id"],
        initiating_link=initiating["id"],
        return_link=returning["id"] if returning else None,
        loop=task["loop"],
        name=task["name"],
    )
