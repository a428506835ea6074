"""Command-line front end.

Subcommands:
  validate  full pipeline: parse both documents, bind, check, report
  paths     enumerate the model's bounded trace set
  lint      well-formedness checks only (model and/or requirements files)

Exit codes: 0 = valid / clean, 1 = invalid / defects found, 2 = input or
usage error. Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from . import conformance
from .conformance import ValidationReport, percent
from .diagnostics import ERROR, ParseDiagnostic, ParseError
from .model import Defect, MessageEvent, Trace, format_trace
from .requirements import bind_participants, parse_requirements
from .bpmn import parse_choreography
from .semantics import EnumerationBounds, UnsupportedStructureError, compile_model, enumerate_traces

FORMATS = ("text", "json", "csv")
FORMAT_ENV_VAR = "CHORGATE_FORMAT"


@dataclass(frozen=True)
class CliConfig:
    model_path: str
    requirements_path: str
    loop_bound: int = 2
    max_trace_len: int = 64
    max_traces: int = 10000
    format: str = "text"
    coverage: bool = True


def main(argv: Optional[list[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    fmt = args.format or os.environ.get(FORMAT_ENV_VAR) or "text"
    if fmt not in FORMATS:
        _fail(f"unknown format '{fmt}' (choose from {', '.join(FORMATS)})")
        return 2

    try:
        if args.command == "validate":
            return _cmd_validate(args, fmt)
        if args.command == "paths":
            return _cmd_paths(args, fmt)
        return _cmd_lint(args, fmt)
    except BrokenPipeError:
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chorgate",
        description="Validate BPMN 2.0 choreography models against goal-model requirements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--loop-bound", type=int, default=2, metavar="N",
                        help="max traversals of any single sequence flow per path (default 2)")
    bounds.add_argument("--max-trace-len", type=int, default=64, metavar="N",
                        help="max events per enumerated trace (default 64)")
    bounds.add_argument("--max-traces", type=int, default=10000, metavar="N",
                        help="cap on the enumerated trace set (default 10000)")
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=FORMATS, default=None,
                     help=f"output format (default: ${FORMAT_ENV_VAR} or text)")

    p_validate = sub.add_parser("validate", parents=[bounds, fmt],
                                help="validate a model against a requirements document")
    p_validate.add_argument("model", help="BPMN 2.0 choreography XML file")
    p_validate.add_argument("requirements", help="requirements JSON file (goal model + scenarios)")
    p_validate.add_argument("--no-coverage", action="store_true",
                            help="skip the extra-path (coverage) check")

    p_paths = sub.add_parser("paths", parents=[bounds, fmt],
                             help="enumerate the model's bounded trace set")
    p_paths.add_argument("model", help="BPMN 2.0 choreography XML file")

    p_lint = sub.add_parser("lint", parents=[fmt],
                            help="check well-formedness of model/requirements files")
    p_lint.add_argument("files", nargs="+", help="BPMN XML or requirements JSON files")
    return parser


def _cmd_validate(args, fmt: str) -> int:
    config = CliConfig(
        model_path=args.model,
        requirements_path=args.requirements,
        loop_bound=args.loop_bound,
        max_trace_len=args.max_trace_len,
        max_traces=args.max_traces,
        format=fmt,
        coverage=not args.no_coverage,
    )
    bounds = _bounds_of(config.loop_bound, config.max_trace_len, config.max_traces)
    if bounds is None:
        return 2

    model_bytes = _read(config.model_path)
    req_bytes = _read(config.requirements_path)
    if model_bytes is None or req_bytes is None:
        return 2
    try:
        model, warnings = parse_choreography(model_bytes)
    except ParseError as exc:
        _print_diagnostics(exc.diagnostics, config.model_path)
        return 2
    _print_diagnostics(warnings, config.model_path)
    try:
        requirements, warnings = parse_requirements(req_bytes)
    except ParseError as exc:
        _print_diagnostics(exc.diagnostics, config.requirements_path)
        return 2
    _print_diagnostics(warnings, config.requirements_path)

    binding_defects = bind_participants(requirements, model)
    if binding_defects:
        _print_defects(binding_defects, config.requirements_path)
        return 2

    try:
        report = conformance.validate(model, requirements, bounds, check_coverage=config.coverage)
    except (UnsupportedStructureError, conformance.EmptyExpansionError) as exc:
        _fail(str(exc))
        return 2

    sys.stdout.buffer.write(render(report, config.format))
    sys.stdout.buffer.flush()
    return 0 if report.overall_valid else 1


def _cmd_paths(args, fmt: str) -> int:
    bounds = _bounds_of(args.loop_bound, args.max_trace_len, args.max_traces)
    if bounds is None:
        return 2
    data = _read(args.model)
    if data is None:
        return 2
    try:
        model, warnings = parse_choreography(data)
    except ParseError as exc:
        _print_diagnostics(exc.diagnostics, args.model)
        return 2
    _print_diagnostics(warnings, args.model)
    try:
        traces, truncated = enumerate_traces(compile_model(model), bounds)
    except UnsupportedStructureError as exc:
        _fail(str(exc))
        return 2
    sys.stdout.buffer.write(_render_paths(model.name, traces, truncated, bounds, fmt))
    sys.stdout.buffer.flush()
    return 0


def _cmd_lint(args, fmt: str) -> int:
    findings: list[tuple[str, tuple[ParseDiagnostic, ...]]] = []
    for path in args.files:
        data = _read(path)
        if data is None:
            return 2
        kind = _sniff(data)
        try:
            if kind == "bpmn":
                _, diags = parse_choreography(data)
            else:
                _, diags = parse_requirements(data)
            findings.append((path, tuple(diags)))
        except ParseError as exc:
            findings.append((path, exc.diagnostics))
    sys.stdout.buffer.write(_render_lint(findings, fmt))
    sys.stdout.buffer.flush()
    failed = any(d.severity == ERROR for _, diags in findings for d in diags)
    return 1 if failed else 0


def _sniff(data: bytes) -> str:
    return "bpmn" if data.lstrip()[:1] == b"<" else "requirements"


def _bounds_of(loop_bound: int, max_trace_len: int, max_traces: int) -> Optional[EnumerationBounds]:
    try:
        return EnumerationBounds(loop_bound=loop_bound, max_trace_len=max_trace_len, max_traces=max_traces)
    except ValueError as exc:
        _fail(str(exc))
        return None


def _read(path: str) -> Optional[bytes]:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        _fail(f"cannot read '{path}': {exc.strerror or exc}")
        return None


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _print_diagnostics(diagnostics: Iterable[ParseDiagnostic], path: str) -> None:
    for diag in diagnostics:
        print(f"{path}: {diag}", file=sys.stderr)


def _print_defects(defects: Iterable[Defect], path: str) -> None:
    for defect in defects:
        print(f"{path}: error{defect}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render(report: ValidationReport, fmt: str) -> bytes:
    """Render a validation report in the requested format as UTF-8 bytes.
    Rendering is deterministic: identical reports give identical bytes."""
    if fmt == "json":
        text = json.dumps(_report_obj(report), indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        text = _report_csv(report)
    else:
        text = _report_text(report)
    return text.encode("utf-8")


def _event_obj(event: MessageEvent) -> dict:
    return {"message": event.message, "from": event.sender, "to": event.receiver}


def _fraction_obj(value) -> Optional[dict]:
    if value is None:
        return None
    return {"ratio": f"{value.numerator}/{value.denominator}", "percent": percent(value)}


def _report_obj(report: ValidationReport) -> dict:
    return {
        "model": report.model_name,
        "overall": "valid" if report.overall_valid else "invalid",
        "requirements": report.requirement_count,
        "scenarios": {"valid": report.valid_scenario_count, "invalid": report.invalid_scenario_count},
        "verdicts": [
            {
                "scenario": v.scenario_id,
                "polarity": v.polarity,
                "realized": v.realized,
                "evidence_kind": v.evidence_kind,
                "evidence": [_event_obj(e) for e in v.evidence] if v.evidence is not None else None,
            }
            for v in report.verdicts
        ],
        "matrix": {"tp": report.matrix.tp, "fn": report.matrix.fn, "fp": report.matrix.fp, "tn": report.matrix.tn},
        "metrics": {
            "accuracy": _fraction_obj(report.metrics.accuracy),
            "precision": _fraction_obj(report.metrics.precision),
            "recall": _fraction_obj(report.metrics.recall),
        },
        "coverage": {
            "checked": report.coverage_checked,
            "truncated": report.truncated,
            "uncovered": [[_event_obj(e) for e in t] for t in report.uncovered],
        },
    }


def _pct_cell(value) -> str:
    p = percent(value)
    return "N/A" if p is None else f"{p}%"


def _report_csv(report: ValidationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["process", "requirements", "valid_scenarios", "invalid_scenarios",
         "tp", "fn", "fp", "tn", "accuracy", "precision", "recall"]
    )
    writer.writerow(
        [
            report.model_name,
            report.requirement_count,
            report.valid_scenario_count,
            report.invalid_scenario_count,
            report.matrix.tp,
            report.matrix.fn,
            report.matrix.fp,
            report.matrix.tn,
            _pct_cell(report.metrics.accuracy),
            _pct_cell(report.metrics.precision),
            _pct_cell(report.metrics.recall),
        ]
    )
    return buffer.getvalue()


def _report_text(report: ValidationReport) -> str:
    lines = [
        f"model: {report.model_name}",
        f"overall: {'VALID' if report.overall_valid else 'INVALID'}",
        f"requirements: {report.requirement_count}  scenarios: "
        f"{report.valid_scenario_count} valid, {report.invalid_scenario_count} invalid",
        "",
        "scenario verdicts:",
    ]
    for v in report.verdicts:
        status = "realized" if v.realized else "not realized"
        lines.append(f"  {v.scenario_id} [{v.polarity}]: {status}")
        if v.evidence is not None:
            lines.append(f"    {v.evidence_kind}: {format_trace(v.evidence)}")
    m = report.matrix
    lines += [
        "",
        f"confusion matrix: TP={m.tp} FN={m.fn} FP={m.fp} TN={m.tn}",
        f"metrics: accuracy={_pct_cell(report.metrics.accuracy)} "
        f"precision={_pct_cell(report.metrics.precision)} recall={_pct_cell(report.metrics.recall)}",
        "",
    ]
    if not report.coverage_checked:
        lines.append("coverage: not checked (--no-coverage)")
    elif not report.uncovered and not report.truncated:
        lines.append("coverage: complete, no uncovered traces")
    else:
        lines.append(f"coverage: {len(report.uncovered)} uncovered trace(s)"
                     + (" [enumeration truncated: verdict is bound-limited]" if report.truncated else ""))
        for trace in report.uncovered[:10]:
            lines.append(f"  uncovered: {format_trace(trace)}")
        if len(report.uncovered) > 10:
            lines.append(f"  ... and {len(report.uncovered) - 10} more")
    return "\n".join(lines) + "\n"


def _render_paths(name: str, traces: tuple[Trace, ...], truncated: bool,
                  bounds: EnumerationBounds, fmt: str) -> bytes:
    if fmt == "json":
        obj = {
            "model": name,
            "bounds": {
                "loop_bound": bounds.loop_bound,
                "max_trace_len": bounds.max_trace_len,
                "max_traces": bounds.max_traces,
            },
            "trace_count": len(traces),
            "truncated": truncated,
            "traces": [[_event_obj(e) for e in t] for t in traces],
        }
        text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["index", "length", "trace"])
        for i, trace in enumerate(traces):
            writer.writerow([i, len(trace), format_trace(trace)])
        text = buffer.getvalue()
    else:
        lines = [f"model: {name}", f"traces: {len(traces)}" + (" (truncated)" if truncated else "")]
        lines += [f"  {format_trace(t)}" for t in traces]
        text = "\n".join(lines) + "\n"
    return text.encode("utf-8")


def _render_lint(findings: list[tuple[str, tuple[ParseDiagnostic, ...]]], fmt: str) -> bytes:
    if fmt == "json":
        obj = {
            "files": [
                {
                    "path": path,
                    "status": "invalid" if any(d.severity == ERROR for d in diags) else "ok",
                    "diagnostics": [
                        {
                            "severity": d.severity,
                            "code": d.code,
                            "location": d.location,
                            "line": d.line,
                            "message": d.message,
                        }
                        for d in diags
                    ],
                }
                for path, diags in findings
            ]
        }
        text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["file", "severity", "code", "location", "line", "message"])
        for path, diags in findings:
            for d in diags:
                writer.writerow([path, d.severity, d.code, d.location, d.line if d.line else "", d.message])
        text = buffer.getvalue()
    else:
        lines = []
        for path, diags in findings:
            if not diags:
                lines.append(f"{path}: ok")
            for d in diags:
                lines.append(f"{path}: {d}")
        text = "\n".join(lines) + "\n"
    return text.encode("utf-8")


if __name__ == "__main__":
    sys.exit(main())
