import pytest

from chorgate.bpmn import parse_choreography
from chorgate.diagnostics import ParseError
from chorgate.model import ChoreographyTask, EndEvent, StartEvent

MINIMAL = b"""<?xml version="1.0" encoding="UTF-8"?>
<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL" id="d1"
             targetNamespace="http://example.test/minimal">
  <choreography id="c1" name="minimal">
    <participant id="p1" name="buyer"/>
    <participant id="p2" name="agency"/>
    <messageFlow id="mf1" sourceRef="p1" targetRef="p2" messageRef="msg1"/>
    <startEvent id="s"/>
    <choreographyTask id="t" name="Exchange" initiatingParticipantRef="p1">
      <participantRef>p1</participantRef>
      <participantRef>p2</participantRef>
      <messageFlowRef>mf1</messageFlowRef>
    </choreographyTask>
    <endEvent id="e"/>
    <sequenceFlow id="f1" sourceRef="s" targetRef="t"/>
    <sequenceFlow id="f2" sourceRef="t" targetRef="e"/>
  </choreography>
  <message id="msg1" name="m"/>
</definitions>
"""


def patch(doc: bytes, old: str, new: str) -> bytes:
    assert old.encode() in doc
    return doc.replace(old.encode(), new.encode())


def errors_of(exc: ParseError) -> set[str]:
    return {d.code for d in exc.diagnostics if d.severity == "error"}


class TestMinimalDocument:
    def test_counts(self):
        model, warnings = parse_choreography(MINIMAL)
        assert warnings == []
        assert len(model.participants) == 2
        assert len(model.links) == 1
        assert len(model.nodes) == 3

    def test_shapes(self):
        model, _ = parse_choreography(MINIMAL)
        start, task, end = model.nodes
        assert isinstance(start, StartEvent)
        assert isinstance(task, ChoreographyTask)
        assert isinstance(end, EndEvent)
        assert task.initiating_link == "mf1" and task.return_link is None
        link = model.links[0]
        assert (link.message, link.sender, link.receiver) == ("m", "buyer", "agency")
        assert link.sending_activity == link.receiving_activity == "t"

    def test_participant_name_falls_back_to_id(self):
        doc = patch(MINIMAL, '<participant id="p1" name="buyer"/>', '<participant id="p1"/>')
        model, _ = parse_choreography(doc)
        assert "p1" in model.participants

    def test_message_name_falls_back_to_flow_name_then_id(self):
        doc = patch(MINIMAL, ' messageRef="msg1"', ' name="hello"')
        model, _ = parse_choreography(doc)
        assert model.links[0].message == "hello"
        doc = patch(MINIMAL, ' messageRef="msg1"', "")
        model, _ = parse_choreography(doc)
        assert model.links[0].message == "mf1"


class TestPurchasingFixture:
    def test_participants(self, purchasing_model):
        assert purchasing_model.participants == frozenset({"buyer", "agency", "factory"})
        assert purchasing_model.name == "purchasing"

    def test_element_counts(self, purchasing_model):
        tasks = [n for n in purchasing_model.nodes if isinstance(n, ChoreographyTask)]
        assert len(purchasing_model.nodes) == 29
        assert len(tasks) == 21
        assert len(purchasing_model.flows) == 36
        assert len(purchasing_model.links) == 27

    def test_two_way_task_order_is_initiating_then_return(self, purchasing_model):
        task = purchasing_model.node_map()["ct_reg_special"]
        links = purchasing_model.link_map()
        assert links[task.initiating_link].sender == "buyer"
        assert links[task.return_link].sender == "agency"

    def test_factory_initiated_task(self, purchasing_model):
        task = purchasing_model.node_map()["ct_fix_shortcomings"]
        links = purchasing_model.link_map()
        assert links[task.initiating_link].sender == "factory"
        assert links[task.return_link].sender == "buyer"

    def test_loop_markers(self, purchasing_model):
        nodes = purchasing_model.node_map()
        assert nodes["ct_superior_confirm"].loop.test_before is False
        assert nodes["ct_data_transfer"].loop.test_before is True
        assert nodes["ct_reg_ordinary"].loop is None

    def test_links_mirror_message_flows(self, purchasing_model):
        for link in purchasing_model.links:
            assert link.sender in purchasing_model.participants
            assert link.receiver in purchasing_model.participants
            assert link.sender != link.receiver

    def test_reparse_is_structurally_equal(self, purchasing_bytes, purchasing_model):
        again, _ = parse_choreography(purchasing_bytes)
        assert again == purchasing_model


class TestDiagnostics:
    def test_malformed_xml(self):
        with pytest.raises(ParseError) as err:
            parse_choreography(b"<definitions><oops</definitions>")
        assert errors_of(err.value) == {"MalformedXml"}
        assert err.value.diagnostics[0].line == 1

    def test_wrong_root(self):
        with pytest.raises(ParseError) as err:
            parse_choreography(b'<process xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"/>')
        assert "MissingDefinitions" in errors_of(err.value)

    def test_no_choreography(self):
        with pytest.raises(ParseError) as err:
            parse_choreography(b'<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"/>')
        assert "MissingDefinitions" in errors_of(err.value)

    def test_dangling_message_flow_ref(self):
        doc = patch(MINIMAL, "<messageFlowRef>mf1</messageFlowRef>", "<messageFlowRef>mf9</messageFlowRef>")
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        dangling = [d for d in err.value.diagnostics if d.code == "DanglingReference"]
        assert dangling and "mf9" in dangling[0].message
        assert dangling[0].location == "choreographyTask#t"
        assert dangling[0].line is not None

    def test_dangling_message_ref(self):
        doc = patch(MINIMAL, 'messageRef="msg1"', 'messageRef="nope"')
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        assert "DanglingReference" in errors_of(err.value)

    def test_unsupported_gateway(self):
        doc = patch(MINIMAL, "<startEvent id=\"s\"/>", "<startEvent id=\"s\"/><eventBasedGateway id=\"g\"/>")
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        assert "UnsupportedElement" in errors_of(err.value)

    def test_duplicate_id(self):
        doc = patch(MINIMAL, '<endEvent id="e"/>', '<endEvent id="e"/><endEvent id="e"/>')
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        assert "DuplicateId" in errors_of(err.value)

    def test_initiator_must_send_a_flow(self):
        doc = patch(MINIMAL, 'initiatingParticipantRef="p1"', 'initiatingParticipantRef="p2"')
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        assert "BadInitiatingFlow" in errors_of(err.value)

    def test_validation_defects_surface_as_diagnostics(self):
        doc = patch(MINIMAL, '<sequenceFlow id="f1" sourceRef="s" targetRef="t"/>', "")
        with pytest.raises(ParseError) as err:
            parse_choreography(doc)
        assert "BadTaskArity" in errors_of(err.value)

    def test_unrecognized_element_warns_but_parses(self):
        doc = patch(MINIMAL, '<startEvent id="s"/>', '<startEvent id="s"/><textAnnotation id="n1"/>')
        model, warnings = parse_choreography(doc)
        assert len(model.nodes) == 3
        assert any(w.code == "UnrecognizedElement" and w.severity == "warning" for w in warnings)

    def test_determinism_of_model_and_diagnostics(self, purchasing_bytes):
        assert parse_choreography(purchasing_bytes) == parse_choreography(purchasing_bytes)
        bad = patch(MINIMAL, "mf1</messageFlowRef>", "mf9</messageFlowRef>")
        with pytest.raises(ParseError) as first:
            parse_choreography(bad)
        with pytest.raises(ParseError) as second:
            parse_choreography(bad)
        assert first.value.diagnostics == second.value.diagnostics
