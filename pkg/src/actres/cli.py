"""Command line front end and whole-flow orchestration.

Exit status: 0 everything passed, 1 a check or verification failed,
2 bad input, 3 the flow could not build a consistent target/schedule.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .constraint_graph import (FeasibilityReport, build_graph, check_feasibility, enumerate_cycles,
                               project_to_fast)
from .models import Config, Constraint, EdgeRef, ParseError, Schedule, VerificationReport
from .phasefile_io import (parse_composites, parse_config, parse_constraints, parse_definitions,
                           parse_schedule, parse_variant_timings, write_constraints, write_schedule)
from .scheduler import ScheduleError, normalize, schedule_nodes, verify_schedule
from .synth_verify import build_composites, sum_variant_timings, verify_synthesis
from .target_gen import SlackOvershootError, assign_slacks, break_cycles, build_target_graph
from .waveform_emit import WaveformError, check_relationships, corner_schedule, emit_dot, emit_pwl, unroll

log = logging.getLogger("actres")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception, code: int):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.code = code


@dataclass
class PipelineRun:
    config: Config
    inputs: dict[str, Path]
    stage_outputs: dict[str, Path] = field(default_factory=dict)
    reports: list[VerificationReport] = field(default_factory=list)
    feasibility: FeasibilityReport | None = None
    schedule: Schedule | None = None

    @property
    def passed(self) -> bool:
        return (self.feasibility is None or self.feasibility.feasible) and all(r.passed for r in self.reports)


def _read(path: Path | str) -> str:
    return Path(path).read_text(encoding="ascii")


def _load(defs_path, cons_path):
    defs = parse_definitions(_read(defs_path)) if defs_path else None
    return defs, parse_constraints(_read(cons_path), defs)


def load_config(path: Path | str | None = None, **overrides) -> Config:
    return parse_config(_read(path) if path else "", **overrides)


def run_check(defs_path, cons_path, cfg: Config | None = None) -> FeasibilityReport:
    _, constraints = _load(defs_path, cons_path)
    g = build_graph(constraints)
    return check_feasibility(g, enumerate_cycles(g))


def run_pipeline(defs_path, cons_path, cfg: Config, out_dir, node0: EdgeRef | None = None,
                 normalize_mode: str = "none", project: bool = True) -> PipelineRun:
    """Project, target, schedule and verify; write every intermediate file to ``out_dir``.

    Raises ``StageError`` naming the failing stage.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inputs = {"defs": defs_path, "cons": cons_path}
    run = PipelineRun(cfg, {k: Path(v) for k, v in inputs.items() if v is not None})

    def emit(key: str, name: str, text: str):
        path = out / name
        path.write_text(text, encoding="ascii")
        run.stage_outputs[key] = path

    try:
        _, constraints = _load(defs_path, cons_path)
    except (ParseError, OSError) as exc:
        raise StageError("parse", exc, EXIT_INPUT) from exc

    if project:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            constraints = project_to_fast(constraints, cfg)
        for w in caught:
            log.warning("%s", w.message)
        emit("updated", "updated.cons", write_constraints(constraints))

    g = build_graph(constraints)
    cycles = enumerate_cycles(g)
    run.feasibility = check_feasibility(g, cycles)
    emit("check", "check.txt", run.feasibility.format())
    emit("graph_dot", "constraints.dot", emit_dot(g))
    if not run.feasibility.feasible:
        raise StageError("check", ValueError("constraint set has a positive cycle"), EXIT_FAIL)

    try:
        target = build_target_graph(g, assign_slacks(g, cycles, cfg.default_slack_ps))
    except SlackOvershootError as exc:
        raise StageError("target", exc, EXIT_INFEASIBLE) from exc
    emit("target", "target.cons", write_constraints(target.graph.to_constraints(), with_kind=False))
    emit("target_dot", "target.dot", emit_dot(target, "target"))

    acyclic = break_cycles(target)
    emit("acyclic", "acyclic.cons", write_constraints(
        [Constraint(a.src, a.dst, a.weight_ps, a.kind) for a in acyclic.kept_arcs], with_kind=False))
    emit("acyclic_dot", "acyclic.dot", emit_dot(acyclic, "acyclic"))

    try:
        schedule = schedule_nodes(acyclic, node0)
    except ScheduleError as exc:
        raise StageError("schedule", exc, EXIT_INFEASIBLE) from exc
    except ValueError as exc:
        raise StageError("schedule", exc, EXIT_INPUT) from exc
    run.schedule = normalize(schedule, normalize_mode)
    emit("schedule", "schedule.sched", write_schedule(run.schedule))

    report = verify_schedule(run.schedule, constraints)
    run.reports.append(report)
    emit("verify", "verify.txt", report.format())
    return run


def run_verify_synth(cons_path, defs_path=None, variants_path=None, composites_path=None,
                     cte_path=None) -> VerificationReport:
    """Verify synthesized timings given either per-variant timings or composites.

    With ``cte_path`` the variants file holds intrinsic-tree delays and the
    two are summed per variant first.
    """
    if (variants_path is None) == (composites_path is None):
        raise ValueError("give exactly one of variants or composites")
    defs, constraints = _load(defs_path, cons_path)
    if composites_path is not None:
        composites = parse_composites(_read(composites_path))
    else:
        if defs is None:
            raise ValueError("variant timings need the definition file to resolve phase names")
        variants = parse_variant_timings(_read(variants_path))
        if cte_path is not None:
            variants = sum_variant_timings(variants, parse_variant_timings(_read(cte_path)))
        composites = build_composites(variants, defs)
    return verify_synthesis(composites, constraints)


# -- argument handling ----------------------------------------------------

def _edge_arg(text: str) -> EdgeRef:
    try:
        return EdgeRef.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--defs", type=Path, help="phase definition file")
    common.add_argument("--cons", type=Path, help="constraint file")
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out", type=Path, help="output directory (default: stdout only)")
    common.add_argument("--corner", choices=["slow", "typical", "fast"])
    common.add_argument("--default-slack", type=int, dest="default_slack_ps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="actres", description="Clock-phase constraint scheduling and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("check", parents=[common], help="report cycles and feasibility")
    sub.add_parser("project", parents=[common], help="project constraints to the fast corner")
    sub.add_parser("graph", parents=[common], help="emit the constraint digraph as DOT")
    sub.add_parser("target", parents=[common], help="write target and acyclic target files")

    p = sub.add_parser("schedule", parents=[common], help="schedule an (acyclic) target file")
    p.add_argument("--ref", type=_edge_arg)
    p.add_argument("--normalize", action="store_true")

    p = sub.add_parser("verify-schedule", parents=[common], help="verify a schedule file")
    p.add_argument("--schedule", type=Path, required=True)

    p = sub.add_parser("verify-synth", parents=[common], help="verify synthesized clock timings")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--variants", type=Path)
    src.add_argument("--composites", type=Path)
    p.add_argument("--cte", type=Path, help="extrinsic-tree timings to add to --variants")

    p = sub.add_parser("waves", parents=[common], help="unroll a schedule into PWL sources")
    p.add_argument("--schedule", type=Path, required=True)
    p.add_argument("--hyperperiods", type=int, default=1)
    p.add_argument("--rise-fall", type=int, default=50, dest="rise_fall")
    p.add_argument("--vhigh", type=int, default=1800, help="high level in mV")

    p = sub.add_parser("pipeline", parents=[common], help="run the whole scheduling flow")
    p.add_argument("--ref", type=_edge_arg)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--no-project", action="store_true", help="constraints are already at the fast corner")
    return parser


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"{args.command} needs " + ", ".join("--" + n for n in missing))


def _write(args, name: str, text: str):
    sys.stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / name).write_text(text, encoding="ascii")


def _dispatch(args) -> int:
    cfg = load_config(args.config, corner=args.corner, default_slack_ps=args.default_slack_ps)
    cmd = args.command

    if cmd == "pipeline":
        _require(args, "defs", "cons")
        try:
            run = run_pipeline(args.defs, args.cons, cfg, args.out or Path("."), args.ref,
                               "shift_min_to_zero" if args.normalize else "none", not args.no_project)
        except StageError as exc:
            print(f"actres: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
            return exc.code
        report = run.reports[-1]
        sys.stdout.write(report.format())
        print(f"{report.n_passed}/{len(report.rows)} Pass")
        return EXIT_OK if run.passed else EXIT_FAIL

    if cmd == "verify-synth":
        _require(args, "cons")
        report = run_verify_synth(args.cons, args.defs, args.variants, args.composites, args.cte)
        _write(args, "verify_synth.txt", report.format())
        print(f"{report.n_passed}/{len(report.rows)} Pass")
        return EXIT_OK if report.passed else EXIT_FAIL

    if cmd == "waves":
        _require(args, "defs")
        defs = parse_definitions(_read(args.defs))
        s = corner_schedule(parse_schedule(_read(args.schedule)), cfg)
        traces = unroll(s, defs, cfg, args.hyperperiods)
        _write(args, f"waves_{cfg.corner.value}.pwl", emit_pwl(traces, args.rise_fall, args.vhigh))
        if args.cons is not None:
            report = check_relationships(traces, parse_constraints(_read(args.cons), defs))
            sys.stderr.write(report.format())
            return EXIT_OK if report.passed else EXIT_FAIL
        return EXIT_OK

    _require(args, "cons")
    defs, constraints = _load(args.defs, args.cons)

    if cmd == "check":
        g = build_graph(constraints)
        report = check_feasibility(g, enumerate_cycles(g))
        _write(args, "check.txt", report.format())
        return EXIT_OK if report.feasible else EXIT_FAIL

    if cmd == "project":
        _write(args, "updated.cons", write_constraints(project_to_fast(constraints, cfg)))
        return EXIT_OK

    if cmd == "graph":
        _write(args, "constraints.dot", emit_dot(build_graph(constraints)))
        return EXIT_OK

    if cmd == "target":
        g = build_graph(constraints)
        target = build_target_graph(g, assign_slacks(g, enumerate_cycles(g), cfg.default_slack_ps))
        acyclic = break_cycles(target)
        _write(args, "target.cons", write_constraints(target.graph.to_constraints(), with_kind=False))
        text = write_constraints([Constraint(a.src, a.dst, a.weight_ps, a.kind) for a in acyclic.kept_arcs],
                                 with_kind=False)
        if args.out is not None:
            (args.out / "acyclic.cons").write_text(text, encoding="ascii")
        return EXIT_OK

    if cmd == "schedule":
        s = schedule_nodes(break_cycles(build_graph(constraints)), args.ref)
        s = normalize(s, "shift_min_to_zero" if args.normalize else "none")
        _write(args, "schedule.sched", write_schedule(s))
        return EXIT_OK

    if cmd == "verify-schedule":
        report = verify_schedule(parse_schedule(_read(args.schedule)), constraints)
        _write(args, "verify.txt", report.format())
        print(f"{report.n_passed}/{len(report.rows)} Pass")
        return EXIT_OK if report.passed else EXIT_FAIL

    raise AssertionError(cmd)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="actres: %(levelname)s: %(message)s")
    try:
        return _dispatch(args)
    except (SlackOvershootError, ScheduleError) as exc:
        print(f"actres: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, OSError, KeyError, ValueError, WaveformError) as exc:
        print(f"actres: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
