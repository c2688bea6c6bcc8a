"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 no equilibrium where one is needed.
Every command that writes files also writes ``<output>.manifest.json``;
``polymatrix replay MANIFEST`` re-runs it.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .constructions import ConstructionError, ConstructionKind, ConstructionSpec, construct
from .dynamics import IntegratorConfig, Method, convergence_report, simulate
from .equilibrium import (
    NoEquilibrium,
    NoEquilibriumError,
    equilibrium_set,
    leibniz_det,
    nash_residual,
    solve_unique,
    uniqueness_preconditions,
)
from .game import AgentPartition, GameClass, affine_reduce, classify
from .io import FormatError, csv_text, dump_game, dumps, load_game
from .sampling import MonteCarloReport, SamplerConfig, mc_unique_fraction, sample_game

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class InputError(Exception):
    pass


def _reals(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def _dims(text: str) -> AgentPartition:
    try:
        return AgentPartition.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _manifest(args: argparse.Namespace, argv: List[str], outputs: List[Path]) -> None:
    if not outputs:
        return
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "argv")}
    manifest = {
        "command": args.command,
        "argv": argv,
        "config": {k: _plain(v) for k, v in config.items()},
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }
    _write(Path(f"{outputs[0]}.manifest.json"), dumps(manifest))


def _plain(value):
    if isinstance(value, AgentPartition):
        return list(value.dims)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value"):
        return value.value
    return value


def _load(path: Path, costs: Optional[np.ndarray] = None):
    game = load_game(path)
    if costs is not None:
        if len(costs) != game.K:
            raise InputError(f"--costs needs {game.K} values, got {len(costs)}")
        game = game.with_costs(costs)
    return game


def cmd_construct(args) -> List[Path]:
    spec = ConstructionSpec(args.kind, args.dims)
    costs = args.costs
    if costs is not None and len(costs) != spec.partition.K:
        raise InputError(f"--costs needs {spec.partition.K} values, got {len(costs)}")
    game = construct(spec, costs)
    report = uniqueness_preconditions(game)
    line = f"{report.verdict.value} K={game.K} det_sign={report.det_sign} |det|={report.det_abs:.12g}"
    if game.K <= 10:
        line += f" leibniz_det={leibniz_det(game.matrix):g}"
    if args.out is None:
        sys.stdout.write(dump_game(game))
        print(line, file=sys.stderr)
        return []
    print(line)
    return [_write(args.out, dump_game(game))]


def cmd_sample(args) -> List[Path]:
    config = SamplerConfig(args.game_class, args.dims, args.scale, args.seed,
                           args.index + 1, args.gaussian_costs)
    text = dump_game(sample_game(config, args.index))
    if args.out is None:
        sys.stdout.write(text)
        return []
    return [_write(args.out, text)]


def cmd_classify(args) -> List[Path]:
    game = _load(args.game)
    print(classify(game.matrix, game.partition, args.tol).value)
    return []


def solve_report(game) -> dict:
    result = solve_unique(game)
    report = uniqueness_preconditions(game)
    out = {"verdict": report.verdict.value}
    if isinstance(result, np.ndarray):
        out["x_star"] = result
        out["nash_residual"] = nash_residual(game, result)
    elif isinstance(result, NoEquilibrium):
        out["least_squares_residual"] = result.residual
    else:
        eqset = equilibrium_set(game)
        out.update(W=eqset.W, particular=eqset.particular,
                   basis=[row for row in eqset.basis],
                   nash_residual=nash_residual(game, eqset.particular))
    out["uniqueness"] = report.to_dict()
    return out


def cmd_solve(args) -> List[Path]:
    game = _load(args.game, args.costs)
    report = solve_report(game)
    verdict = report["verdict"]
    if verdict == "NonUnique":
        verdict = f"NonUnique(W={report['W']})"
    print(verdict)
    text = dumps(report)
    if args.out is None:
        sys.stdout.write(text)
        return []
    return [_write(args.out, text)]


def cmd_reduce(args) -> List[Path]:
    game = _load(args.game)
    red = affine_reduce(game, args.agent, args.coeffs, args.offset, args.pivot,
                        preserve_class=args.preserve_class)
    print(f"reduced dims {red.game.partition} class {red.game.game_class.value}")
    text = dump_game(red.game)
    if args.out is None:
        sys.stdout.write(text)
        return []
    return [_write(args.out, text)]


def cmd_montecarlo(args) -> List[Path]:
    config = SamplerConfig(args.game_class, args.dims, args.scale, args.seed, args.samples,
                           args.gaussian_costs)
    report = mc_unique_fraction(config, workers=args.workers)
    row = csv_text(MonteCarloReport.CSV_HEADER, [report.csv_row()])
    sys.stdout.write(row.splitlines()[1] + "\n")
    outputs = []
    if args.out is not None:
        outputs.append(_write(args.out, dumps(report.to_dict())))
    if args.csv is not None:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        fresh = not args.csv.exists() or args.csv.stat().st_size == 0
        with args.csv.open("a") as fh:
            fh.write(row if fresh else row.split("\n", 1)[1])
        outputs.append(args.csv)
    return outputs


def cmd_simulate(args) -> List[Path]:
    game = _load(args.game, args.costs)
    if args.x0 is not None:
        x0 = args.x0
        if len(x0) != game.K:
            raise InputError(f"--x0 needs {game.K} values, got {len(x0)}")
    else:
        x0 = np.random.default_rng(args.seed).normal(size=game.K)
    config = IntegratorConfig(args.method, args.step, args.horizon, args.record_every)
    traj = simulate(game, x0, config)
    for message in traj.warnings:
        print(f"warning: {message}", file=sys.stderr)

    report = None
    if classify(game.matrix, game.partition) is GameClass.ZERO_SUM and traj.x_star is not None:
        report = convergence_report(game, traj)

    outputs = []
    header, rows = traj.csv_rows()
    out = args.out or Path("trajectory.csv")
    outputs.append(_write(out, csv_text(header, rows)))
    summary = {
        "x0": x0,
        "config": config.to_dict(),
        "warnings": list(traj.warnings),
        "closest_equilibrium": traj.x_star,
        "convergence": report.to_dict() if report is not None else None,
    }
    outputs.append(_write(args.report or out.with_suffix(".json"), dumps(summary)))
    if args.svg is not None:
        from .plotting import render_trajectory

        outputs.extend(render_trajectory(traj, report, args.svg))
    if report is not None:
        print(report.summary())
        print("closest equilibrium: " + ", ".join(f"{v:.10g}" for v in report.x_star))
    else:
        print(f"final xbar = {', '.join(f'{v:.10g}' for v in traj.averages[-1])}")
    return outputs


def cmd_replay(args) -> List[Path]:
    manifest = json.loads(Path(args.manifest).read_text())
    if manifest.get("command") == "replay":
        raise InputError("refusing to replay a replay manifest")
    code = main(manifest["argv"])
    if code:
        raise SystemExit(code)
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polymatrix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    classes = [c.value for c in GameClass]

    p = add("construct", cmd_construct, "build a unique-equilibrium witness game")
    p.add_argument("--kind", required=True, choices=[k.value for k in ConstructionKind])
    p.add_argument("--dims", required=True, type=_dims)
    p.add_argument("--costs", type=_reals)
    p.add_argument("--out", type=Path)

    p = add("sample", cmd_sample, "draw one Gaussian game")
    p.add_argument("--class", dest="game_class", required=True, choices=classes)
    p.add_argument("--dims", required=True, type=_dims)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--gaussian-costs", action="store_true")
    p.add_argument("--out", type=Path)

    p = add("classify", cmd_classify, "classify a game file by its consolidated matrix")
    p.add_argument("game", type=Path)
    p.add_argument("--tol", type=float)

    p = add("solve", cmd_solve, "equilibrium verdict and solution")
    p.add_argument("game", type=Path)
    p.add_argument("--costs", type=_reals)
    p.add_argument("--out", type=Path)

    p = add("reduce", cmd_reduce, "eliminate one coordinate under an affine constraint")
    p.add_argument("game", type=Path)
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--coeffs", type=_reals, required=True)
    p.add_argument("--offset", type=float, required=True)
    p.add_argument("--pivot", type=int, required=True)
    p.add_argument("--preserve-class", action="store_true")
    p.add_argument("--out", type=Path)

    p = add("montecarlo", cmd_montecarlo, "fraction of sampled games with a unique equilibrium")
    p.add_argument("--class", dest="game_class", required=True, choices=classes)
    p.add_argument("--dims", required=True, type=_dims)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--gaussian-costs", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--csv", type=Path, help="sweep file; one row is appended per run")

    p = add("simulate", cmd_simulate, "continuous-time gradient descent")
    p.add_argument("game", type=Path)
    p.add_argument("--x0", type=_reals)
    p.add_argument("--costs", type=_reals)
    p.add_argument("--seed", type=int, default=0, help="seeds x0 when --x0 is absent")
    p.add_argument("--method", choices=[m.value for m in Method], default="exact")
    p.add_argument("--horizon", type=float, default=1e3)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--record-every", type=float, default=0.1)
    p.add_argument("--out", type=Path, help="trajectory CSV (default trajectory.csv)")
    p.add_argument("--report", type=Path, help="convergence JSON (default next to --out)")
    p.add_argument("--svg", type=Path, help="prefix for SVG figures")

    p = add("replay", cmd_replay, "re-run the command recorded in a manifest")
    p.add_argument("manifest", type=Path)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        outputs = args.func(args)
    except NoEquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, FormatError, ConstructionError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command != "replay":
        _manifest(args, argv, outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
