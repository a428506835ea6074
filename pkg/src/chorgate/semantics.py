"""Trace semantics for choreography models.

A model is compiled to a finite acceptor over message events by playing a
token game on its sequence flows: a state is a (marking, in-flight task)
pair, where the marking is the set of flows currently holding a token.
Firing a node consumes tokens from its incoming flows and produces tokens
on its outgoing flows; the run is complete (accepting) when no token and
no half-finished exchange remains.

Semantics encoded by the construction:

* A choreography task emits its initiating event and then, for two-way
  tasks, its return event with nothing else interleaved in between (the
  in-flight component blocks every other firing).
* Exclusive gateways pick exactly one branch; parallel gateways fork all
  branches (full interleaving) and their merges synchronize.
* A task loop marker repeats the task: test_before=True admits zero
  executions, test_before=False demands at least one. The marker itself
  is unbounded; ``enumerate_traces`` bounds it like a back-edge.
* Flow cycles are allowed. ``accepts`` handles them by state-set
  simulation; ``enumerate_traces`` limits how often any single flow (or
  loop marker) may be traversed on one path.

Soundness limit: if a firing would put a second token on a flow that
already holds one (e.g. a parallel split merged by an exclusive gateway),
the structure has no faithful finite-acceptor semantics here and
compilation fails with UnsupportedStructureError.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from .model import (
    ChoreographyModel,
    ChoreographyTask,
    EndEvent,
    ExclusiveGateway,
    InvalidModelError,
    MessageEvent,
    ParallelGateway,
    StartEvent,
    Trace,
    trace_key,
    validate_choreography,
)

# Marking positions and traversal-cost keys are tuples of strings:
#   ("flow", src, dst)  a sequence flow        (position + cost)
#   ("pre", task)       marker loop, before an iteration   (position only)
#   ("post", task)      marker loop, after an iteration    (position only)
#   ("loop", task)      one execution of a marked task     (cost only)
EdgeKey = tuple[str, ...]


@dataclass(frozen=True)
class Step:
    """One automaton step; event None means an epsilon step. ``flows``
    names the bounded edges this step consumes (for enumeration limits)."""

    source: int
    event: Optional[MessageEvent]
    target: int
    flows: tuple[EdgeKey, ...] = ()


@dataclass(frozen=True)
class TraceAutomaton:
    states: frozenset[int]
    initial: int
    accepting: frozenset[int]
    steps: tuple[Step, ...]

    @property
    def transitions(self) -> tuple[tuple[int, MessageEvent, int], ...]:
        return tuple((s.source, s.event, s.target) for s in self.steps if s.event is not None)

    @property
    def epsilons(self) -> tuple[tuple[int, int], ...]:
        return tuple((s.source, s.target) for s in self.steps if s.event is None)


@dataclass(frozen=True)
class EnumerationBounds:
    """Finiteness controls for trace enumeration.

    loop_bound caps how often one sequence flow (or task loop marker) may
    be traversed per path; max_trace_len caps events per trace; max_traces
    caps the result set.
    """

    loop_bound: int = 2
    max_trace_len: int = 64
    max_traces: int = 10000

    def __post_init__(self):
        for field_name in ("loop_bound", "max_trace_len", "max_traces"):
            if getattr(self, field_name) < 0:
                raise ValueError(f"{field_name} must be non-negative")


class UnsupportedStructureError(Exception):
    """The flow graph has no sound token-game semantics (token pile-up)."""


_State = tuple[frozenset, Optional[str]]


def compile_model(model: ChoreographyModel) -> TraceAutomaton:
    """Compile a well-formed choreography model to its trace acceptor.

    Raises InvalidModelError if the model fails well-formedness, and
    UnsupportedStructureError if a reachable firing would accumulate two
    tokens on one flow.
    """
    defects = validate_choreography(model)
    if defects:
        raise InvalidModelError(defects)

    nodes = model.node_map()
    links = model.link_map()
    in_edges: dict[str, list[EdgeKey]] = {n.id: [] for n in model.nodes}
    out_edges: dict[str, list[EdgeKey]] = {n.id: [] for n in model.nodes}
    for src, dst in model.flows:
        key = ("flow", src, dst)
        out_edges[src].append(key)
        in_edges[dst].append(key)
    for edges in (*in_edges.values(), *out_edges.values()):
        edges.sort()

    def event_of(link_id: str) -> MessageEvent:
        link = links[link_id]
        return MessageEvent(message=link.message, sender=link.sender, receiver=link.receiver)

    def task_done_key(task: ChoreographyTask) -> EdgeKey:
        if task.loop is None:
            return out_edges[task.id][0]
        return ("pre", task.id) if task.loop.test_before else ("post", task.id)

    def firings(state: _State) -> Iterator[tuple[Optional[MessageEvent], tuple[EdgeKey, ...], _State]]:
        marking, inflight = state
        if inflight is not None:
            task = nodes[inflight]
            yield (event_of(task.return_link), (), (_produce(marking, [task_done_key(task)], task.id), None))
            return
        for node_id in sorted(nodes):
            node = nodes[node_id]
            if isinstance(node, EndEvent):
                for edge in in_edges[node_id]:
                    if edge in marking:
                        yield (None, (edge,), (marking - {edge}, None))
            elif isinstance(node, ExclusiveGateway):
                for edge in in_edges[node_id]:
                    if edge in marking:
                        for out in out_edges[node_id]:
                            yield (None, (edge,), (_produce(marking - {edge}, [out], node_id), None))
            elif isinstance(node, ParallelGateway):
                ins = in_edges[node_id]
                if all(edge in marking for edge in ins):
                    after = _produce(marking - set(ins), out_edges[node_id], node_id)
                    yield (None, tuple(ins), (after, None))
            elif isinstance(node, ChoreographyTask):
                yield from _task_firings(node, marking)

    def _task_firings(task: ChoreographyTask, marking: frozenset):
        entry = in_edges[task.id][0]
        if task.loop is None:
            if entry in marking:
                consumed = marking - {entry}
                if task.return_link:
                    yield (event_of(task.initiating_link), (entry,), (consumed, task.id))
                else:
                    yield (event_of(task.initiating_link), (entry,), (_produce(consumed, [task_done_key(task)], task.id), None))
            return
        pre, post = ("pre", task.id), ("post", task.id)
        exit_out = out_edges[task.id][0]
        if entry in marking:
            yield (None, (entry,), (_produce(marking - {entry}, [pre], task.id), None))
        if pre in marking:
            consumed = marking - {pre}
            cost = (("loop", task.id),)
            if task.return_link:
                yield (event_of(task.initiating_link), cost, (consumed, task.id))
            else:
                yield (event_of(task.initiating_link), cost, (_produce(consumed, [task_done_key(task)], task.id), None))
            if task.loop.test_before:
                yield (None, (), (_produce(consumed, [exit_out], task.id), None))
        if not task.loop.test_before and post in marking:
            yield (None, (), (_produce(marking - {post}, [pre], task.id), None))
            yield (None, (), (_produce(marking - {post}, [exit_out], task.id), None))

    def _produce(marking: frozenset, produced: list[EdgeKey], at: str) -> frozenset:
        added = set()
        for key in produced:
            if key in marking or key in added:
                raise UnsupportedStructureError(
                    f"firing '{at}' would put a second token on {_edge_name(key)}; "
                    "a parallel branch is not paired with a synchronizing join"
                )
            added.add(key)
        return marking | added

    start_id = next(n.id for n in model.nodes if isinstance(n, StartEvent))
    initial: _State = (frozenset(out_edges[start_id]), None)

    state_ids: dict[_State, int] = {initial: 0}
    steps: list[Step] = []
    queue: deque[_State] = deque([initial])
    while queue:
        state = queue.popleft()
        source = state_ids[state]
        for event, cost, target_state in firings(state):
            if target_state not in state_ids:
                state_ids[target_state] = len(state_ids)
                queue.append(target_state)
            steps.append(Step(source=source, event=event, target=state_ids[target_state], flows=cost))

    accepting = frozenset(i for (marking, inflight), i in state_ids.items() if not marking and inflight is None)
    return TraceAutomaton(
        states=frozenset(range(len(state_ids))),
        initial=0,
        accepting=accepting,
        steps=tuple(steps),
    )


def _edge_name(key: EdgeKey) -> str:
    if key[0] == "flow":
        return f"sequence flow {key[1]} -> {key[2]}"
    return f"loop point of task '{key[1]}'"


def accepts(automaton: TraceAutomaton, trace: Trace) -> bool:
    """True iff the trace is in the automaton's language. Runs a state-set
    simulation with epsilon closure, so cyclic automata need no unrolling."""
    eps_from: dict[int, list[int]] = {}
    by_event: dict[tuple[int, MessageEvent], list[int]] = {}
    for step in automaton.steps:
        if step.event is None:
            eps_from.setdefault(step.source, []).append(step.target)
        else:
            by_event.setdefault((step.source, step.event), []).append(step.target)

    def closure(states: set[int]) -> set[int]:
        frontier = list(states)
        while frontier:
            state = frontier.pop()
            for nxt in eps_from.get(state, ()):
                if nxt not in states:
                    states.add(nxt)
                    frontier.append(nxt)
        return states

    current = closure({automaton.initial})
    for event in trace:
        moved = {t for s in current for t in by_event.get((s, event), ())}
        if not moved:
            return False
        current = closure(moved)
    return bool(current & automaton.accepting)


def enumerate_traces(
    automaton: TraceAutomaton,
    bounds: EnumerationBounds = EnumerationBounds(),
) -> tuple[tuple[Trace, ...], bool]:
    """Every accepted trace reachable without traversing any bounded edge
    more than ``bounds.loop_bound`` times, in shortlex order.

    The second result is the truncation flag: True iff max_trace_len or
    max_traces cut off exploration that could still have reached
    acceptance (the loop bound itself is the defining limit, not
    truncation).
    """
    steps_from: dict[int, list[Step]] = {}
    into: dict[int, list[int]] = {}
    for step in automaton.steps:
        steps_from.setdefault(step.source, []).append(step)
        into.setdefault(step.target, []).append(step.source)

    live = set(automaton.accepting)
    frontier = list(live)
    while frontier:
        state = frontier.pop()
        for prev in into.get(state, ()):
            if prev not in live:
                live.add(prev)
                frontier.append(prev)

    results: set[Trace] = set()
    truncated = False
    path: list[MessageEvent] = []
    counts: dict[EdgeKey, int] = {}

    if automaton.initial not in live:
        return (), False
    if automaton.initial in automaton.accepting:
        results.add(())

    # Depth-first over firing paths with an explicit stack; frames remember
    # the step that entered them so path/counters can be unwound.
    stack: list[tuple[Optional[Step], Iterator[Step]]] = [
        (None, iter(steps_from.get(automaton.initial, ())))
    ]
    while stack:
        entered, pending = stack[-1]
        step = next(pending, None)
        if step is None:
            stack.pop()
            if entered is not None:
                if entered.event is not None:
                    path.pop()
                for key in entered.flows:
                    counts[key] -= 1
            continue
        if step.target not in live:
            continue
        if any(counts.get(key, 0) >= bounds.loop_bound for key in step.flows):
            continue
        if step.event is not None and len(path) >= bounds.max_trace_len:
            truncated = True
            continue
        for key in step.flows:
            counts[key] = counts.get(key, 0) + 1
        if step.event is not None:
            path.append(step.event)
        if step.target in automaton.accepting:
            trace = tuple(path)
            if trace not in results:
                if len(results) >= bounds.max_traces:
                    truncated = True
                    break
                results.add(trace)
        stack.append((step, iter(steps_from.get(step.target, ()))))
    return tuple(sorted(results, key=trace_key)), truncated
