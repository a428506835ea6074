"""Scenario conformance checking and confusion-matrix scoring.

A valid scenario is realized when the model admits *every* expansion of
it (the declared loop range is a demand); an invalid scenario is realized
when the model admits *any* expansion (one admitted counterexample is
enough). Coverage then asks the converse question: does the model contain
traces no valid scenario accounts for?
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    ConfusionMatrix,
    Loop,
    MessageEvent,
    Scenario,
    ScenarioElement,
    Trace,
    VALID,
    requirements_of,
    trace_key,
)
from .requirements import RequirementsDoc
from .semantics import EnumerationBounds, TraceAutomaton, accepts, compile_model, enumerate_traces


class EmptyExpansionError(Exception):
    """A scenario has no expansion at the given loop bound, so checking it
    would be vacuous; surfaced instead of silently passing."""

    def __init__(self, scenario_id: str, loop_bound: int):
        self.scenario_id = scenario_id
        self.loop_bound = loop_bound
        super().__init__(
            f"scenario '{scenario_id}' has no expansions at loop bound {loop_bound}"
            " (a loop's minimum exceeds the bound)"
        )


@dataclass(frozen=True)
class ScenarioVerdict:
    scenario_id: str
    polarity: str
    realized: bool
    evidence: Optional[Trace]

    @property
    def evidence_kind(self) -> Optional[str]:
        if self.polarity == VALID:
            return "witness" if self.realized else "rejected_expansion"
        return "counterexample" if self.realized else None


@dataclass(frozen=True)
class Metrics:
    """Precision/recall/accuracy as exact rationals; None when the
    denominator is zero (rendered as N/A, never as 0 or 100)."""

    precision: Optional[Fraction]
    recall: Optional[Fraction]
    accuracy: Optional[Fraction]


def percent(value: Optional[Fraction]) -> Optional[int]:
    """Whole-percent rendering, rounding halves up; None stays None."""
    if value is None:
        return None
    return int(value * 100 + Fraction(1, 2))


@dataclass(frozen=True)
class ValidationReport:
    model_name: str
    requirement_count: int
    verdicts: tuple[ScenarioVerdict, ...]
    matrix: ConfusionMatrix
    metrics: Metrics
    uncovered: tuple[Trace, ...]
    truncated: bool
    coverage_checked: bool
    overall_valid: bool

    @property
    def valid_scenario_count(self) -> int:
        return sum(1 for v in self.verdicts if v.polarity == VALID)

    @property
    def invalid_scenario_count(self) -> int:
        return len(self.verdicts) - self.valid_scenario_count


def expand_scenario(scenario: Scenario, loop_bound: int) -> tuple[Trace, ...]:
    """All traces the scenario denotes, with every loop unrolled for each
    repetition count in [min_reps, min(max_reps, loop_bound)]. Result is
    deduplicated and in shortlex order; empty if any loop's interval is
    empty at this bound."""
    return tuple(sorted(_expand_elements(scenario.body, loop_bound), key=trace_key))


def _expand_elements(elements: Sequence[ScenarioElement], loop_bound: int) -> set[Trace]:
    prefixes: set[Trace] = {()}
    for element in elements:
        if isinstance(element, MessageEvent):
            choices: set[Trace] = {(element,)}
        else:
            choices = _expand_loop(element, loop_bound)
        prefixes = {p + c for p in prefixes for c in choices}
        if not prefixes:
            return set()
    return prefixes


def _expand_loop(loop: Loop, loop_bound: int) -> set[Trace]:
    body_choices = sorted(_expand_elements(loop.body, loop_bound), key=trace_key)
    unrollings: set[Trace] = set()
    for reps in range(loop.min_reps, min(loop.max_reps, loop_bound) + 1):
        for combo in itertools.product(body_choices, repeat=reps):
            unrollings.add(tuple(itertools.chain.from_iterable(combo)))
    return unrollings


def check_scenario(automaton: TraceAutomaton, scenario: Scenario, loop_bound: int) -> ScenarioVerdict:
    """Decide whether the model realizes the scenario.

    Valid scenario: realized iff every expansion is accepted; the evidence
    is a witness (first expansion) when realized, else the first rejected
    expansion. Invalid scenario: realized iff some expansion is accepted;
    the evidence is that counterexample.
    """
    expansions = expand_scenario(scenario, loop_bound)
    if not expansions:
        raise EmptyExpansionError(scenario.id, loop_bound)
    if scenario.polarity == VALID:
        rejected = next((t for t in expansions if not accepts(automaton, t)), None)
        if rejected is None:
            return ScenarioVerdict(scenario.id, scenario.polarity, True, expansions[0])
        return ScenarioVerdict(scenario.id, scenario.polarity, False, rejected)
    admitted = next((t for t in expansions if accepts(automaton, t)), None)
    if admitted is None:
        return ScenarioVerdict(scenario.id, scenario.polarity, False, None)
    return ScenarioVerdict(scenario.id, scenario.polarity, True, admitted)


def classify(verdicts: Iterable[ScenarioVerdict]) -> ConfusionMatrix:
    """Confusion counts over verdicts: valid scenarios split into TP
    (realized) / FN (not), invalid ones into FP (realized) / TN (not)."""
    tp = fn = fp = tn = 0
    for verdict in verdicts:
        if verdict.polarity == VALID:
            if verdict.realized:
                tp += 1
            else:
                fn += 1
        elif verdict.realized:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)


def compute_metrics(matrix: ConfusionMatrix) -> Metrics:
    def ratio(num: int, den: int) -> Optional[Fraction]:
        return Fraction(num, den) if den else None

    return Metrics(
        precision=ratio(matrix.tp, matrix.tp + matrix.fp),
        recall=ratio(matrix.tp, matrix.tp + matrix.fn),
        accuracy=ratio(matrix.tp + matrix.tn, matrix.total),
    )


def coverage_check(
    automaton: TraceAutomaton,
    valid_scenarios: Iterable[Scenario],
    bounds: EnumerationBounds,
) -> tuple[tuple[Trace, ...], bool]:
    """Model traces (bounded enumeration) not covered by any valid-scenario
    expansion, in shortlex order, plus the propagated truncation flag."""
    traces, truncated = enumerate_traces(automaton, bounds)
    covered: set[Trace] = set()
    for scenario in valid_scenarios:
        covered.update(expand_scenario(scenario, bounds.loop_bound))
    return tuple(t for t in traces if t not in covered), truncated


def validate(
    model,
    requirements: RequirementsDoc,
    bounds: EnumerationBounds = EnumerationBounds(),
    check_coverage: bool = True,
) -> ValidationReport:
    """Run the whole pipeline: compile the model, check every scenario,
    classify, compute metrics, and (unless disabled) check for extra paths.

    Overall verdict is valid iff every valid scenario is realized, no
    invalid scenario is realized, and coverage (when checked) found no
    uncovered trace and was not truncated. A truncated enumeration can
    never support a "no extra paths" claim, so it forces invalid.
    """
    automaton = compile_model(model)
    verdicts = tuple(check_scenario(automaton, s, bounds.loop_bound) for s in requirements.scenarios)
    matrix = classify(verdicts)
    metrics = compute_metrics(matrix)
    if check_coverage:
        valid_scenarios = [s for s in requirements.scenarios if s.polarity == VALID]
        uncovered, truncated = coverage_check(automaton, valid_scenarios, bounds)
    else:
        uncovered, truncated = (), False
    overall = (
        matrix.fn == 0
        and matrix.fp == 0
        and (not check_coverage or (not uncovered and not truncated))
    )
    return ValidationReport(
        model_name=model.name,
        requirement_count=len(requirements_of(requirements.goal_model)),
        verdicts=verdicts,
        matrix=matrix,
        metrics=metrics,
        uncovered=uncovered,
        truncated=truncated,
        coverage_checked=check_coverage,
        overall_valid=overall,
    )
