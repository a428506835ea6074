"""Random structured choreography models: sequences, XOR/AND blocks, XOR
flow loops, and task loop markers, under a node budget. Every generated
model passes well-formedness, so it can feed compilation directly."""

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chorgate.model import (  # noqa: E402
    ChoreographyModel,
    ChoreographyTask,
    EndEvent,
    ExclusiveGateway,
    LoopMarker,
    MessageLink,
    ParallelGateway,
    StartEvent,
    validate_choreography,
)

PARTICIPANTS = ("alpha", "beta", "gamma")


class _Builder:
    def __init__(self):
        self.nodes = []
        self.flows = []
        self.links = []
        self.counter = 0

    def fresh(self, prefix):
        self.counter += 1
        return f"{prefix}{self.counter}"

    def flow(self, src, dst):
        self.flows.append((src, dst))

    def gateway(self, cls):
        node_id = self.fresh("g")
        self.nodes.append(cls(node_id))
        return node_id

    def task(self, rng):
        task_id = self.fresh("t")
        sender, receiver = rng.sample(PARTICIPANTS, 2)
        initiating = MessageLink(f"L{task_id}", f"msg-{task_id}", sender, receiver, task_id, task_id)
        self.links.append(initiating)
        return_id = None
        if rng.random() < 0.3:
            reply = MessageLink(f"R{task_id}", f"reply-{task_id}", receiver, sender, task_id, task_id)
            self.links.append(reply)
            return_id = reply.id
        marker = None
        if rng.random() < 0.25:
            marker = LoopMarker(test_before=rng.random() < 0.5)
        self.nodes.append(
            ChoreographyTask(id=task_id, initiating_link=initiating.id, return_link=return_id, loop=marker)
        )
        return task_id


def _block(b: _Builder, rng: random.Random, budget: int):
    """Grow one single-entry single-exit block; returns (entry, exit, used)."""
    roll = rng.random()
    if budget >= 4 and roll < 0.25:
        cls = rng.choice((ExclusiveGateway, ParallelGateway))
        split, merge = b.gateway(cls), b.gateway(cls)
        entry1, exit1, used1 = _block(b, rng, rng.randint(1, budget - 3))
        entry2, exit2, used2 = _block(b, rng, budget - 2 - used1)
        b.flow(split, entry1)
        b.flow(exit1, merge)
        b.flow(split, entry2)
        b.flow(exit2, merge)
        return split, merge, 2 + used1 + used2
    if budget >= 4 and roll < 0.40:
        # XOR flow loop: merge -> body -> split, with a back edge split -> merge
        merge, split = b.gateway(ExclusiveGateway), b.gateway(ExclusiveGateway)
        entry, exit_, used = _block(b, rng, budget - 2)
        b.flow(merge, entry)
        b.flow(exit_, split)
        b.flow(split, merge)
        return merge, split, 2 + used
    if budget >= 2 and roll < 0.75:
        entry1, exit1, used1 = _block(b, rng, rng.randint(1, budget - 1))
        entry2, exit2, used2 = _block(b, rng, budget - used1)
        b.flow(exit1, entry2)
        return entry1, exit2, used1 + used2
    task_id = b.task(rng)
    return task_id, task_id, 1


def random_model(rng: random.Random, max_nodes: int = 8) -> ChoreographyModel:
    b = _Builder()
    entry, exit_, _ = _block(b, rng, max_nodes - 2)
    nodes = (StartEvent("start"), *b.nodes, EndEvent("end"))
    flows = (("start", entry), *b.flows, (exit_, "end"))
    model = ChoreographyModel(
        name=f"random-{rng.getrandbits(32):08x}",
        participants=frozenset(PARTICIPANTS),
        nodes=nodes,
        flows=flows,
        links=tuple(b.links),
    )
    defects = validate_choreography(model)
    if defects:  # generator bug, not caller input
        raise AssertionError(f"generated an ill-formed model: {defects}")
    assert len(model.nodes) <= max_nodes
    return model
