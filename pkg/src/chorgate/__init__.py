"""chorgate: validates BPMN 2.0 choreography models against goal-model
requirements — every valid scenario must be a trace of the model, no
invalid scenario may be, and the model may contain no extra paths."""

from .model import (
    ChoreographyModel,
    ChoreographyTask,
    ConfusionMatrix,
    Defect,
    EndEvent,
    ExclusiveGateway,
    Goal,
    GoalModel,
    InvalidModelError,
    Loop,
    LoopMarker,
    MessageEvent,
    MessageLink,
    ParallelGateway,
    Scenario,
    StartEvent,
    Trace,
    goal_model_defects,
    requirements_of,
    validate_choreography,
    validate_goal_model,
)
from .diagnostics import ParseDiagnostic, ParseError
from .bpmn import parse_choreography
from .requirements import RequirementsDoc, bind_participants, parse_requirements
from .semantics import (
    EnumerationBounds,
    TraceAutomaton,
    UnsupportedStructureError,
    accepts,
    compile_model,
    enumerate_traces,
)
from .conformance import (
    EmptyExpansionError,
    Metrics,
    ScenarioVerdict,
    ValidationReport,
    check_scenario,
    classify,
    compute_metrics,
    coverage_check,
    expand_scenario,
    percent,
    validate,
)
from .cli import CliConfig, main, render, run

__version__ = "0.1.0"

__all__ = [
    "ChoreographyModel",
    "ChoreographyTask",
    "CliConfig",
    "ConfusionMatrix",
    "Defect",
    "EmptyExpansionError",
    "EndEvent",
    "EnumerationBounds",
    "ExclusiveGateway",
    "Goal",
    "GoalModel",
    "InvalidModelError",
    "Loop",
    "LoopMarker",
    "MessageEvent",
    "MessageLink",
    "Metrics",
    "ParallelGateway",
    "ParseDiagnostic",
    "ParseError",
    "RequirementsDoc",
    "Scenario",
    "ScenarioVerdict",
    "StartEvent",
    "Trace",
    "TraceAutomaton",
    "UnsupportedStructureError",
    "ValidationReport",
    "accepts",
    "bind_participants",
    "check_scenario",
    "classify",
    "compile_model",
    "compute_metrics",
    "coverage_check",
    "enumerate_traces",
    "expand_scenario",
    "goal_model_defects",
    "main",
    "parse_choreography",
    "parse_requirements",
    "percent",
    "render",
    "requirements_of",
    "run",
    "validate",
    "validate_choreography",
    "validate_goal_model",
]
