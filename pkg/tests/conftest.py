import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
for extra in (ROOT / "src", ROOT / "scripts", ROOT / "tests"):
    if str(extra) not in sys.path:
        sys.path.insert(0, str(extra))

from chorgate.bpmn import BPMN_NS, parse_choreography  # noqa: E402
from chorgate.model import MessageEvent  # noqa: E402
from chorgate.requirements import parse_requirements  # noqa: E402
from chorgate.semantics import compile_model  # noqa: E402

FIXTURES = ROOT / "fixtures"
PURCHASING_BPMN = FIXTURES / "purchasing.bpmn"
PURCHASING_REQS = FIXTURES / "purchasing.requirements.json"


def ev(message: str, sender: str, receiver: str) -> MessageEvent:
    return MessageEvent(message=message, sender=sender, receiver=receiver)


def _rep(body: list, k: int) -> list:
    return body * k


def _purchasing_traces() -> list[tuple[MessageEvent, ...]]:
    """The complete bounded trace set of the purchasing fixture at loop
    bound 2, derived by hand from the fixture graph (one trace per branch
    of the requirement split, loops unrolled 0..2 / 1..2 times)."""
    superior_pair = [ev("confirmation request", "agency", "factory"),
                     ev("factory confirmation", "factory", "agency")]
    retry_pair = [ev("shortcoming list", "factory", "buyer"),
                  ev("buying request", "buyer", "factory")]
    data_pair = [ev("order data request", "factory", "buyer"),
                 ev("order data", "buyer", "factory")]
    nego_pair = [ev("price offer", "buyer", "factory"),
                 ev("counter offer", "factory", "buyer")]

    traces = [
        [ev("ordinary registration request", "buyer", "agency")],
        [ev("special registration request", "buyer", "agency"),
         ev("registration confirmation", "agency", "buyer")],
    ]
    for k in (1, 2):
        traces.append(
            [ev("superior registration request", "buyer", "agency")]
            + _rep(superior_pair, k)
            + [ev("registration notice", "agency", "buyer")]
        )
    for k in (0, 1, 2):
        traces.append(
            [ev("buying request", "buyer", "factory")]
            + _rep(retry_pair, k)
            + [ev("request confirmation", "factory", "buyer"),
               ev("registration documents", "buyer", "factory")]
        )
    for k in (0, 1, 2):
        traces.append(
            [ev("order request", "buyer", "factory")]
            + _rep(data_pair, k)
            + [ev("order confirmation", "factory", "buyer")]
        )
    traces.append(
        [ev("delivery type query", "buyer", "agency"),
         ev("delivery type proposal", "agency", "buyer"),
         ev("delivery type choice", "buyer", "agency")]
    )
    for k in (1, 2):
        traces.append(_rep(nego_pair, k) + [ev("price agreement", "factory", "buyer")])
    traces.append(
        [ev("cost announcement", "factory", "buyer"),
         ev("payment", "buyer", "factory"),
         ev("payment receipt", "factory", "buyer")]
    )
    traces.append(
        [ev("cost announcement", "factory", "buyer"),
         ev("payment", "buyer", "factory"),
         ev("payment failure", "factory", "buyer"),
         ev("no delivery notice", "factory", "agency")]
    )
    return [tuple(t) for t in traces]


@pytest.fixture(scope="session")
def purchasing_bytes() -> bytes:
    return PURCHASING_BPMN.read_bytes()


@pytest.fixture(scope="session")
def requirements_bytes() -> bytes:
    return PURCHASING_REQS.read_bytes()


@pytest.fixture(scope="session")
def purchasing_model(purchasing_bytes):
    model, warnings = parse_choreography(purchasing_bytes)
    assert warnings == []
    return model


@pytest.fixture(scope="session")
def purchasing_requirements(requirements_bytes):
    doc, warnings = parse_requirements(requirements_bytes)
    assert warnings == []
    return doc


@pytest.fixture(scope="session")
def purchasing_automaton(purchasing_model):
    return compile_model(purchasing_model)


@pytest.fixture(scope="session")
def expected_purchasing_traces():
    return _purchasing_traces()


# ---------------------------------------------------------------------------
# Fixture mutations (XML surgery on the purchasing document)
# ---------------------------------------------------------------------------

_NS = {"b": BPMN_NS}


def _chor(root: ET.Element) -> ET.Element:
    return root.find("b:choreography", _NS)


def remove_payment_task(xml_bytes: bytes) -> bytes:
    """Drop the payment exchange: the cost announcement now flows straight
    into the payment outcome split."""
    root = ET.fromstring(xml_bytes)
    chor = _chor(root)
    chor.remove(chor.find("b:choreographyTask[@id='ct_pay']", _NS))
    chor.remove(chor.find("b:messageFlow[@id='mf_payment']", _NS))
    chor.remove(chor.find("b:sequenceFlow[@id='sf_r5c']", _NS))
    chor.find("b:sequenceFlow[@id='sf_r5b']", _NS).set("targetRef", "g_pay_split")
    return ET.tostring(root)


def add_refund_branch(xml_bytes: bytes) -> bytes:
    """Add a third payment outcome (a refund notice) that no scenario
    describes, creating an extra path."""
    root = ET.fromstring(xml_bytes)
    chor = _chor(root)
    ET.SubElement(root, f"{{{BPMN_NS}}}message", {"id": "m_refund", "name": "refund notice"})
    ET.SubElement(
        chor,
        f"{{{BPMN_NS}}}messageFlow",
        {"id": "mf_refund", "sourceRef": "p_factory", "targetRef": "p_buyer", "messageRef": "m_refund"},
    )
    task = ET.SubElement(
        chor,
        f"{{{BPMN_NS}}}choreographyTask",
        {"id": "ct_refund", "name": "Refund Notice", "initiatingParticipantRef": "p_factory"},
    )
    for pid in ("p_factory", "p_buyer"):
        ET.SubElement(task, f"{{{BPMN_NS}}}participantRef").text = pid
    ET.SubElement(task, f"{{{BPMN_NS}}}messageFlowRef").text = "mf_refund"
    ET.SubElement(
        chor, f"{{{BPMN_NS}}}sequenceFlow",
        {"id": "sf_refund1", "sourceRef": "g_pay_split", "targetRef": "ct_refund"},
    )
    ET.SubElement(
        chor, f"{{{BPMN_NS}}}sequenceFlow",
        {"id": "sf_refund2", "sourceRef": "ct_refund", "targetRef": "g_pay_merge"},
    )
    return ET.tostring(root)
