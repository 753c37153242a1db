"""Command-line front end.

    szegedy-search simulate    --graph complete:1000 --marked 999 --operator U2 --steps 50
    szegedy-search analytic    --graph complete:1000 --marked 999 --steps 50
    szegedy-search compare     --graph complete:50 --marked 49 --operator U2 --steps 50
    szegedy-search equivalence --graph petersen --marked 0 --steps 100
    szegedy-search oracle      --graph torus:3x3 --marked 4 --operator U3 --steps 20

``--out FILE.csv`` writes the series there and the JSON summary next to it
(``FILE.json``); the summary is always printed on stdout.  ``--config``
reads ``key = value`` lines (graph, marked, operator, steps, out) that
command-line flags override.

Exit codes: 0 success, 1 invalid arguments, 2 a verification mode exceeded
its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analytic
from .errors import WalkError
from .graphs import Graph, MarkedSet, parse_graph_spec
from .operators import DENSE_MAX_VERTICES, OperatorId, WalkContext, dense_operator, evolve, step
from .srg import verify_reflection_relations, verify_u3_equivalence
from .state import EdgeState

MODES = ("simulate", "analytic", "compare", "equivalence", "oracle")
CONFIG_KEYS = ("graph", "marked", "operator", "steps", "out")
NEEDS_OPERATOR = ("simulate", "compare", "oracle")

COMPARE_TOL = 1e-8
EQUIVALENCE_TOL = 1e-10
RELATION_TOL = 1e-12
ORACLE_TOL = 1e-12
ORACLE_RANDOM_STATES = 20

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    mode: str
    graph_spec: str
    graph: Graph
    marked: MarkedSet
    operator: OperatorId | None
    steps: int
    out: Path | None = None
    walk_threads: int | None = None

    def echo(self) -> dict:
        return {
            "mode": self.mode,
            "graph": self.graph_spec,
            "marked": sorted(self.marked.vertices),
            "operator": self.operator.value if self.operator else None,
            "steps": self.steps,
            "out": str(self.out) if self.out else None,
            "walk_threads": self.walk_threads,
        }


@dataclass
class RunSummary:
    peak_probability: float
    peak_time: int
    final_norm: float | None
    wall_seconds: float
    config_echo: dict
    max_deviation: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "peak_probability": self.peak_probability,
            "peak_time": self.peak_time,
            "final_norm": self.final_norm,
            "wall_seconds": self.wall_seconds,
            "config_echo": self.config_echo,
        }
        if self.max_deviation is not None:
            out["max_deviation"] = self.max_deviation
        if self.details:
            out["details"] = self.details
        return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--graph", help="complete:<n> | torus:<r>x<c> | petersen | paley:<q> | file:<path>")
    common.add_argument("--marked", nargs="+", help="marked vertex indices (0-based)")
    common.add_argument("--operator", help="UP, U1 (=U_M), U2 (=U_P'), U3, U4, U5")
    common.add_argument("--steps", help="number of walk steps (default 100)")
    common.add_argument("--out", help="CSV output path; the JSON summary goes next to it")
    common.add_argument("--config", help="key = value configuration file")
    parser = _Parser(prog="szegedy-search", description="Szegedy quantum-walk search simulator")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in MODES:
        sub.add_parser(mode, parents=[common])
    return parser


def read_config_file(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} (valid: {', '.join(CONFIG_KEYS)})")
        entries[key] = value.strip()
    return entries


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    args = _build_parser().parse_args(list(argv))
    values: dict[str, object] = {}
    if args.config:
        values.update(read_config_file(Path(args.config)))
    for key in CONFIG_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag

    spec = values.get("graph")
    if not spec:
        raise ConfigError("missing --graph")
    try:
        graph = parse_graph_spec(str(spec))
    except WalkError as exc:
        raise ConfigError(f"--graph {spec}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"--graph {spec}: {exc.strerror}") from None

    raw_marked = values.get("marked", [])
    if isinstance(raw_marked, str):
        raw_marked = raw_marked.replace(",", " ").split()
    marked_list = []
    for token in raw_marked:
        try:
            v = int(token)
        except ValueError:
            raise ConfigError(f"--marked: {token!r} is not an integer") from None
        if not 0 <= v < graph.n:
            raise ConfigError(f"--marked: vertex {token} outside 0..{graph.n - 1}")
        marked_list.append(v)
    if len(set(marked_list)) != len(marked_list):
        raise ConfigError("--marked: duplicate vertex")

    operator = None
    if values.get("operator") is not None:
        try:
            operator = OperatorId.parse(str(values["operator"]))
        except WalkError as exc:
            raise ConfigError(f"--operator: {exc}") from None
    elif args.mode in NEEDS_OPERATOR:
        raise ConfigError(f"{args.mode} needs --operator ({', '.join(o.value for o in OperatorId)})")

    try:
        steps = int(values.get("steps", 100))
    except ValueError:
        raise ConfigError(f"--steps: {values['steps']!r} is not an integer") from None
    if steps < 0:
        raise ConfigError(f"--steps: {steps} must be >= 0")

    threads = None
    env = os.environ.get("WALK_THREADS")
    if env:
        try:
            threads = int(env)
            if threads < 1:
                raise ValueError
        except ValueError:
            raise ConfigError(f"WALK_THREADS={env!r} must be a positive integer") from None

    out = values.get("out")
    return ExperimentConfig(
        mode=args.mode,
        graph_spec=str(spec),
        graph=graph,
        marked=MarkedSet.of(marked_list, graph.n),
        operator=operator,
        steps=steps,
        out=Path(str(out)) if out else None,
        walk_threads=threads,
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, row in enumerate(zip(*columns)):
            writer.writerow([t, *(_fmt(float(v)) for v in row)])


def read_series_csv(path: Path) -> dict[str, np.ndarray]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    cols["t"] = cols["t"].astype(int)
    return cols


def _require_complete(cfg: ExperimentConfig) -> None:
    if not cfg.graph.is_complete():
        raise ConfigError(f"{cfg.mode} mode needs a complete graph, got {cfg.graph_spec}")
    if not 1 <= cfg.marked.m < cfg.graph.n:
        raise ConfigError(f"{cfg.mode} mode needs 1 <= m < n marked vertices")


def run(cfg: ExperimentConfig) -> tuple[RunSummary, int]:
    """Execute one experiment; returns the summary and the exit code."""
    start = time.perf_counter()
    status = EXIT_OK
    header: list[str]
    columns: list[np.ndarray]
    max_dev = None
    details: dict = {}
    final_norm = None

    if cfg.mode == "analytic":
        _require_complete(cfg)
        n, m = cfg.graph.n, cfg.marked.m
        probs = analytic.pm_series(n, m, cfg.steps)
        header, columns = ["t", "p_M"], [probs]
        details = {
            "t_max": analytic.t_max(n, m).exact,
            "t_max_asymptotic": analytic.t_max(n, m).asymptotic,
            "peak_asymptotic": analytic.pm_peak_asymptotic(n, m),
            "t_f": analytic.t_f(n, m).exact,
        }
    else:
        ctx = WalkContext(cfg.graph, cfg.marked)
        if cfg.mode == "simulate":
            series = evolve(ctx, cfg.operator, cfg.steps)
            probs = series.probabilities
            final_norm = series.final_state.norm()
            header, columns = ["t", "p_M"], [probs]
        elif cfg.mode == "compare":
            _require_complete(cfg)
            series = evolve(ctx, cfg.operator, cfg.steps)
            probs = series.probabilities
            closed = analytic.pm_series(cfg.graph.n, cfg.marked.m, cfg.steps)
            diff = np.abs(probs - closed)
            max_dev = float(diff.max())
            final_norm = series.final_state.norm()
            header, columns = ["t", "p_M", "p_M_analytic", "abs_diff"], [probs, closed, diff]
            status = EXIT_OK if max_dev <= COMPARE_TOL else EXIT_TOLERANCE
            details = {"tolerance": COMPARE_TOL}
        elif cfg.mode == "equivalence":
            result = verify_u3_equivalence(ctx, cfg.steps)
            probs = result.series_u3.probabilities
            max_dev = result.max_deviation
            final_norm = result.series_u3.final_state.norm()
            header = ["t", "p_M_U3", "p_M_UP'", "state_diff"]
            columns = [probs, result.series_u2.probabilities, result.state_deviation]
            ok = max_dev <= EQUIVALENCE_TOL
            details = {"tolerance": EQUIVALENCE_TOL, "relations": None}
            if cfg.marked.m == 1 and cfg.graph.is_regular():
                try:
                    report = verify_reflection_relations(ctx, tolerance=RELATION_TOL)
                except WalkError as exc:
                    details["relations"] = {"skipped": str(exc)}
                else:
                    details["relations"] = report.to_dict()
                    ok = ok and report.passed
            status = EXIT_OK if ok else EXIT_TOLERANCE
        elif cfg.mode == "oracle":
            if cfg.graph.n > DENSE_MAX_VERTICES:
                raise ConfigError(f"oracle mode needs n <= {DENSE_MAX_VERTICES}, got {cfg.graph.n}")
            series = evolve(ctx, cfg.operator, cfg.steps)
            probs = series.probabilities
            final_norm = series.final_state.norm()
            max_dev, details = _oracle_check(ctx, cfg.operator, cfg.steps)
            header, columns = ["t", "p_M"], [probs]
            status = EXIT_OK if max_dev <= ORACLE_TOL else EXIT_TOLERANCE
        else:  # pragma: no cover - argparse restricts modes
            raise ConfigError(f"unknown mode {cfg.mode}")

    peak_time = int(np.argmax(probs))
    summary = RunSummary(
        peak_probability=float(probs[peak_time]),
        peak_time=peak_time,
        final_norm=final_norm,
        wall_seconds=time.perf_counter() - start,
        config_echo=cfg.echo(),
        max_deviation=max_dev,
        details=details,
    )
    if cfg.out is not None:
        write_csv(cfg.out, header, columns)
        cfg.out.with_suffix(".json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    return summary, status


def _oracle_check(ctx: WalkContext, op: OperatorId, steps: int) -> tuple[float, dict]:
    dense = dense_operator(ctx, op)
    unitarity = float(np.abs(dense.T @ dense - np.eye(dense.shape[0])).max())
    rng = np.random.default_rng(0)
    worst_step = 0.0
    size = ctx.layout.size
    for _ in range(ORACLE_RANDOM_STATES):
        amps = rng.normal(size=size) + 1j * rng.normal(size=size)
        s = EdgeState(amps / np.linalg.norm(amps), ctx.layout)
        d = np.abs(step(ctx, op, s).to_dense() - dense @ s.to_dense()).max()
        worst_step = max(worst_step, float(d))
    worst_traj = 0.0
    vec = ctx.initial_state().to_dense()
    state = ctx.initial_state()
    for _ in range(steps):
        state = step(ctx, op, state)
        vec = dense @ vec
        worst_traj = max(worst_traj, float(np.abs(state.to_dense() - vec).max()))
    details = {
        "tolerance": ORACLE_TOL,
        "unitarity_error": unitarity,
        "random_state_max_diff": worst_step,
        "trajectory_max_diff": worst_traj,
    }
    return max(unitarity, worst_step, worst_traj), details


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        summary, status = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(summary.to_dict(), indent=2))
    return status


if __name__ == "__main__":
    sys.exit(main())
