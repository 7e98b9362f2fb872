"""Command-line interface: solve, sweep, verify, vertex, table1 and export.

Exit codes: 0 success, 1 verification or check failure, 2 invalid
configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .behavior import Behavior, pr_product
from .certify import Certificate, CertificateError, verify_certificate, verify_sandwich, vertex_check
from .guessprob import (
    analytic_reference_exact,
    assemble_full,
    assemble_reduced,
    default_mode,
    guessing_probability,
)
from .lp import LpError
from .nosig import ScenarioKind
from .numeric import Mode, format_scalar, parse_scalar
from .validation import check_bits, check_noise, check_rounds

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
JOBS_ENV = "PRGUESS_JOBS"
CSV_COLUMNS = ["scenario", "n", "v", "G", "H", "H_per_round", "mode", "lower_bound", "upper_bound"]
TABLE1_GRID = ["0", "1/10", "1/5", "1/4", "1/3", "1/2", "3/5", "3/4", "4/5", "9/10", "1"]


class ConfigError(ValueError):
    """Invalid command-line configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    subcommand: str
    n: list = field(default_factory=list)
    scenarios: list = field(default_factory=list)
    v: list = field(default_factory=list)
    mode: Mode | None = None
    formulation: str = "reduced"
    x_star: int = 0
    y_star: int = 0
    out: Path | None = None
    jobs: int = 1


def _parse_n(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError(f"--n must be an integer or comma list, got {text!r}") from None
    return [check_rounds(k) for k in values]


def _parse_scenarios(text: str) -> list[ScenarioKind]:
    if text == "all":
        return list(ScenarioKind)
    return [ScenarioKind.coerce(t) for t in text.split(",")]


def _mode_for(n: int, mode: Mode | None) -> Mode:
    return default_mode(n) if mode is None else mode


def _parse_v_list(text: str, mode: Mode) -> list:
    return [check_noise(parse_scalar(t, mode), mode, low=0, high=1) for t in text.split(",")]


def parse_v_grid(text: str, mode: Mode) -> list:
    """``start:stop:steps`` gives ``steps`` evenly spaced points, both ends included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--v-grid must be start:stop:steps, got {text!r}")
    start, stop = (parse_scalar(p, mode) for p in parts[:2])
    try:
        steps = int(parts[2])
    except ValueError:
        raise ConfigError(f"grid steps must be an integer, got {parts[2]!r}") from None
    if steps < 1:
        raise ConfigError("grid steps must be at least 1")
    if steps == 1:
        grid = [start]
    elif mode is Mode.EXACT:
        grid = [start + (stop - start) * Fraction(k, steps - 1) for k in range(steps)]
    else:
        grid = [start + (stop - start) * k / (steps - 1) for k in range(steps)]
    return [check_noise(v, mode, low=0, high=1) for v in grid]


def default_jobs(points: int) -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"{JOBS_ENV} must be an integer, got {env!r}") from None
        if jobs < 1:
            raise ConfigError(f"{JOBS_ENV} must be positive")
        return jobs
    return max(1, min(points, os.cpu_count() or 1))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prguess", description="No-signaling guessing probabilities for noisy PR boxes.")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def problem_flags(sp, many=False):
        sp.add_argument("--n", required=True, help="number of rounds" + (" (comma list)" if many else ""))
        sp.add_argument("--scenario", required=True,
                        help="fullns|abns|tons|wtons" + (", comma list or 'all'" if many else ""))
        sp.add_argument("--mode", choices=[m.value for m in Mode], default=None,
                        help="default: exact for n <= 3, float otherwise")
        sp.add_argument("--formulation", choices=["reduced", "full"], default="reduced")
        sp.add_argument("--x-star", default=None, help="objective inputs of Alice, n bits (default all zero)")
        sp.add_argument("--y-star", default=None, help="objective inputs of Bob, n bits (default all zero)")

    sp = sub.add_parser("solve", help="solve one instance and write its certificate")
    problem_flags(sp)
    sp.add_argument("--v", required=True)
    sp.add_argument("--out", default=None, help="certificate path")
    sp.add_argument("--no-verify", action="store_true", help="skip re-verifying the certificate")

    sp = sub.add_parser("sweep", help="solve over a grid of v and write CSV")
    problem_flags(sp, many=True)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--v", help="comma list of v values")
    group.add_argument("--v-grid", help="start:stop:steps")
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sp.add_argument("--jobs", type=int, default=None, help=f"worker processes (default: ${JOBS_ENV} or cores)")

    sp = sub.add_parser("verify", help="verify a certificate, or a lower/upper sandwich pair")
    sp.add_argument("certificate")
    sp.add_argument("upper", nargs="?", default=None,
                    help="certificate of a larger regime; checks lower primal against upper dual")

    sp = sub.add_parser("vertex", help="test whether a behavior is a vertex of a regime polytope")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--behavior", default=None, help="behavior JSON; default PR_v tensor power")
    sp.add_argument("--n", default="2")
    sp.add_argument("--v", default="1")

    sp = sub.add_parser("table1", help="solve the closed-form grid for n in {2, 3}")
    sp.add_argument("--check", action="store_true", help="compare against the closed forms")
    sp.add_argument("--n", default="2,3")
    sp.add_argument("--scenario", default="all")
    sp.add_argument("--jobs", type=int, default=None)

    sp = sub.add_parser("export", help="dump (A, b, c) as sparse JSON")
    problem_flags(sp)
    sp.add_argument("--v", required=True)
    sp.add_argument("--out", default=None, help="JSON path (default: stdout)")
    return p


def _problem_config(args, many: bool) -> RunConfig:
    ns = _parse_n(args.n)
    scenarios = _parse_scenarios(args.scenario)
    if not many and (len(ns) != 1 or len(scenarios) != 1):
        raise ConfigError("this command takes a single --n and --scenario")
    mode = Mode.coerce(args.mode) if args.mode else None
    modes = {_mode_for(k, mode) for k in ns}
    if len(modes) != 1:
        raise ConfigError("rounds with different default modes; pass --mode explicitly")
    md = modes.pop()
    if getattr(args, "v_grid", None):
        vs = parse_v_grid(args.v_grid, md)
    else:
        vs = _parse_v_list(args.v, md)
    cfg = RunConfig(args.subcommand, ns, scenarios, vs, md, args.formulation)
    for k in ns:
        cfg.x_star = check_bits(args.x_star, k, "--x-star") if args.x_star is not None else 0
        cfg.y_star = check_bits(args.y_star, k, "--y-star") if args.y_star is not None else 0
    if cfg.formulation == "reduced" and (cfg.x_star or cfg.y_star):
        raise ConfigError("--x-star/--y-star need --formulation full")
    cfg.out = Path(args.out) if getattr(args, "out", None) else None
    return cfg


def _solve_task(task):
    n, scenario, v, mode, formulation, x_star, y_star = task
    res = guessing_probability(n, scenario, v, mode, formulation=formulation, x_star=x_star, y_star=y_star)
    return res.as_row()


def _run_tasks(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_solve_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_task, tasks))


def _default_cert_path(cfg: RunConfig) -> Path:
    v = format_scalar(cfg.v[0]).replace("/", "_")
    return Path(f"cert_{cfg.scenarios[0].value}_n{cfg.n[0]}_v{v}.json")


def cmd_solve(args) -> int:
    cfg = _problem_config(args, many=False)
    if len(cfg.v) != 1:
        raise ConfigError("solve takes a single --v")
    res = guessing_probability(cfg.n[0], cfg.scenarios[0], cfg.v[0], cfg.mode, formulation=cfg.formulation,
                               x_star=cfg.x_star, y_star=cfg.y_star)
    cert = res.certificate()
    path = cfg.out or _default_cert_path(cfg)
    print(f"scenario={res.scenario.value} n={res.n} v={format_scalar(res.v)} mode={res.mode.value}")
    print(f"G={format_scalar(res.G)} (~{float(res.G):.12g})")
    print(f"H={res.H:.12g} H_per_round={res.H_per_round:.12g}")
    print(f"bounds=[{format_scalar(res.lower_bound)}, {format_scalar(res.upper_bound)}]"
          f" within={res.within_bounds(1e-9)}")
    if not args.no_verify:
        report = verify_certificate(cert, res.problem)
        if not report.accepted:
            print(f"certificate rejected: {report.reason}", file=sys.stderr)
            return EXIT_CHECK
        print("certificate: verified")
    cert.save(path)
    print(f"certificate written to {path}")
    return EXIT_OK


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = _problem_config(args, many=True)
    tasks = [(k, s.value, v, cfg.mode, cfg.formulation, cfg.x_star, cfg.y_star)
             for k in cfg.n for s in cfg.scenarios for v in cfg.v]
    jobs = args.jobs if args.jobs is not None else default_jobs(len(tasks))
    if jobs < 1:
        raise ConfigError("--jobs must be positive")
    out = cfg.out
    tmp = out.with_name(out.name + ".partial") if out else None
    try:
        if tmp is not None:
            tmp.write_text("", encoding="utf-8")
        rows = _run_tasks(tasks, jobs)
        text = sweep_csv(rows)
        if tmp is None:
            sys.stdout.write(text)
        else:
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(out)
    finally:
        if tmp is not None and tmp.exists():
            tmp.unlink()
    if out is not None:
        print(f"{len(rows)} rows written to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        lower = Certificate.load(args.certificate)
        upper = Certificate.load(args.upper) if args.upper else None
    except OSError as exc:
        raise ConfigError(f"cannot read certificate: {exc}") from None
    except CertificateError as exc:
        raise ConfigError(str(exc)) from None
    report = verify_sandwich(lower, upper) if upper is not None else verify_certificate(lower)
    for line in report.lines():
        print(line)
    if report.accepted and report.objective is not None:
        print(f"objective={format_scalar(report.objective)}")
    return EXIT_OK if report.accepted else EXIT_CHECK


def cmd_vertex(args) -> int:
    scenario = ScenarioKind.coerce(args.scenario)
    if args.behavior:
        try:
            beh = Behavior.from_json(Path(args.behavior).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read behavior: {exc}") from None
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"malformed behavior file: {exc}") from None
    else:
        n = _parse_n(args.n)
        if len(n) != 1 or n[0] > 2:
            raise ConfigError("vertex builds PR tensor powers for a single n <= 2 only")
        beh = pr_product(check_noise(parse_scalar(args.v, Mode.EXACT), Mode.EXACT), n[0], Mode.EXACT)
    result = vertex_check(beh, scenario)
    print(f"vertex: {'true' if result else 'false'}")
    return EXIT_OK if result else EXIT_CHECK


def table1_rows(ns, scenarios, jobs: int) -> list[tuple]:
    """(scenario, n, v, G, expected) for the built-in closed-form grid."""
    grid = [Fraction(t) for t in TABLE1_GRID]
    tasks = [(k, s.value, v, Mode.EXACT, "reduced", 0, 0) for k in ns for s in scenarios for v in grid]
    rows = _run_tasks(tasks, jobs)
    out = []
    for (k, s, v, *_), row in zip(tasks, rows):
        out.append((s, k, v, Fraction(row["G"]), analytic_reference_exact(k, s, v)))
    return out


def cmd_table1(args) -> int:
    ns = _parse_n(args.n)
    if any(k not in (2, 3) for k in ns):
        raise ConfigError("table1 covers n in {2, 3}")
    scenarios = _parse_scenarios(args.scenario)
    jobs = args.jobs if args.jobs is not None else default_jobs(len(ns) * len(scenarios) * len(TABLE1_GRID))
    bad = 0
    for s, k, v, got, expected in table1_rows(ns, scenarios, jobs):
        ok = got == expected
        bad += not ok
        if args.check and not ok:
            print(f"MISMATCH {s} n={k} v={v}: got {got}, expected {expected}")
        elif not args.check:
            print(f"{s:6} n={k} v={str(v):5} G={got}")
    if args.check:
        print("table1: ok" if not bad else f"table1: {bad} mismatches")
        return EXIT_OK if not bad else EXIT_CHECK
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = _problem_config(args, many=False)
    if len(cfg.v) != 1:
        raise ConfigError("export takes a single --v")
    n, s, v = cfg.n[0], cfg.scenarios[0], cfg.v[0]
    if cfg.formulation == "reduced":
        prob = assemble_reduced(n, s, v, cfg.mode)
    else:
        prob = assemble_full(n, s, v, cfg.x_star, cfg.y_star, cfg.mode)
    data = prob.to_dict()
    data["metadata"] = {"n": n, "scenario": s.value, "v": format_scalar(v), "mode": cfg.mode.value,
                        "formulation": cfg.formulation}
    text = json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text, encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "vertex": cmd_vertex,
    "table1": cmd_table1,
    "export": cmd_export,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.subcommand](args)
    except (ConfigError, ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return EXIT_CONFIG
    except (LpError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
