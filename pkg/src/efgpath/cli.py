"""Command-line front end: ``efgpath {solve,verify,oracle,gen,bench,export-path}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .game_model import GameFormatError, dump_game, load_game
from .gamegen import GameSizeError, GenSpec, generate
from .homotopy import VARIANTS, HomotopyConfig
from .normal_form import (OracleSizeError, build_reduced_normal_form, enumerate_equilibria_small, is_nash,
                          strategy_label)
from .sequence_form import (PerfectRecallError, build_sequence_form, epsilon_gap, flow_violation,
                            mixed_to_realization)
from .tracer import TracerParams, trace

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("efgpath")


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="seed for alpha and random starting plans")
    p.add_argument("--variant", choices=VARIANTS, default=d("lgne"))
    p.add_argument("--kappa0", type=float, default=d(3.0))
    p.add_argument("--alpha-bound", type=float, default=d(0.01))
    p.add_argument("--gamma0", default=d("uniform"),
                   help="'uniform', 'random' or a JSON file {player: {sequence: value}}")
    p.add_argument("--t-end", type=float, default=d(1e-4))
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efgpath", description="Sequence-form Nash equilibria by homotopy")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        _global_flags(p, suppress=True)
        return p

    p = add("solve", help="trace the homotopy on one game")
    p.add_argument("game")
    p.add_argument("--csv", help="write the path table here")
    p.add_argument("--trace-out", help="write the path as JSON for export-path")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--max-time", type=float, default=None)

    p = add("verify", help="check a profile for equilibrium")
    p.add_argument("game")
    p.add_argument("profile", help="JSON: {'kind': 'realization'|'mixed', 'profile': {...}}")
    p.add_argument("--eps", type=float, default=1e-8)

    p = add("oracle", help="reduced normal form and small-game equilibria")
    p.add_argument("game")
    p.add_argument("--no-equilibria", action="store_true")

    p = add("gen", help="write a random benchmark game")
    p.add_argument("--type", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--actions", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("bench", help="run a benchmark sweep")
    p.add_argument("config", help="JSON bench config")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--workers", type=int, default=None)

    p = add("export-path", help="convert a saved path to CSV")
    p.add_argument("trace")
    p.add_argument("--out", help="CSV file (stdout if omitted)")
    return parser


# ---------------------------------------------------------------------------


def _load(path: str):
    try:
        g = load_game(path)
        return g, build_sequence_form(g)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except (GameFormatError, PerfectRecallError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _homotopy_config(args, sf) -> HomotopyConfig:
    gamma0 = args.gamma0
    if gamma0 not in ("uniform", "random"):
        doc = _read_json(gamma0)
        try:
            plan = sf.profile_from_dict(doc)
        except (KeyError, ValueError) as exc:
            raise InputError(f"{gamma0}: {exc}") from None
        if flow_violation(sf, plan) > 1e-9 or any(np.any(g <= 0) for g in plan):
            raise InputError(f"{gamma0}: starting plan must be strictly positive and flow-consistent")
        gamma0 = doc
    try:
        return HomotopyConfig(variant=args.variant, kappa0=args.kappa0, alpha_bound=args.alpha_bound,
                              seed=args.seed, gamma0=gamma0)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(args, doc: dict, text: str):
    print(json.dumps(doc, indent=2) if args.json else text)


def cmd_solve(args) -> int:
    _, sf = _load(args.game)
    cfg = _homotopy_config(args, sf)
    try:
        params = TracerParams(t_end=args.t_end, max_steps=args.max_steps, max_wall_time=args.max_time)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = trace(cfg, sf, params)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            res.trace.to_csv(sf, fh)
    if args.trace_out:
        save_trace(args.trace_out, sf, res.trace, {"game": str(args.game), "variant": cfg.variant, "seed": cfg.seed})
    doc = {
        "status": res.status,
        "steps": res.steps,
        "final_t": res.final_t,
        "gap": res.gap.gaps.tolist(),
        "payoffs": res.payoffs.tolist(),
        "gamma": sf.profile_to_dict(res.gamma),
    }
    lines = [f"status: {res.status} after {res.steps} steps (t = {res.final_t:.3g})",
             "payoffs: " + ", ".join(f"{v:.6g}" for v in res.payoffs),
             "epsilon gap: " + ", ".join(f"{v:.3g}" for v in res.gap.gaps)]
    for i in sf.players:
        plan = ", ".join(f"{lab}={v:.6g}" for lab, v in zip(sf.sequence_labels(i)[1:], res.gamma[i - 1][1:]))
        lines.append(f"player {i}: {plan}")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if res.converged else EXIT_FAIL


def _mixed_from_doc(sf, prof: dict) -> list[np.ndarray]:
    out = []
    for i in sf.players:
        raw = prof.get(str(i), prof.get(i))
        strats = sf.strategies(i)
        if raw is None:
            raise InputError(f"mixed profile lacks player {i}")
        if isinstance(raw, list):
            if len(raw) != len(strats):
                raise InputError(f"player {i}: expected {len(strats)} strategy weights, got {len(raw)}")
            out.append(np.asarray(raw, dtype=float))
            continue
        labels = [strategy_label(s) for s in strats]
        vec = np.zeros(len(strats))
        for lab, v in raw.items():
            if lab not in labels:
                raise InputError(f"player {i}: unknown strategy {lab!r}; known: {', '.join(labels)}")
            vec[labels.index(lab)] = float(v)
        out.append(vec)
    return out


def cmd_verify(args) -> int:
    g, sf = _load(args.game)
    doc = _read_json(args.profile)
    kind = doc.get("kind", "realization")
    prof = doc.get("profile", doc)
    oracle_slack = None
    if kind == "mixed":
        sigma = _mixed_from_doc(sf, prof)
        for i, s in zip(sf.players, sigma):
            if np.any(s < -1e-12) or abs(s.sum() - 1) > 1e-9:
                raise InputError(f"player {i}: mixed strategy must be a probability vector")
        gamma = mixed_to_realization(sf, sigma)
        try:
            nf = build_reduced_normal_form(g)
            oracle_slack = is_nash(nf, sigma, args.eps).slack.tolist()
        except OracleSizeError:
            pass
    elif kind == "realization":
        try:
            gamma = sf.profile_from_dict(prof)
        except (KeyError, ValueError) as exc:
            raise InputError(str(exc)) from None
    else:
        raise InputError(f"unknown profile kind {kind!r}")
    drift = flow_violation(sf, gamma)
    if drift > 1e-9 or any(np.any(v < -1e-12) for v in gamma):
        raise InputError(f"profile is not a realization plan (flow violation {drift:.3g})")
    rep = epsilon_gap(sf, gamma)
    ok = rep.is_equilibrium(args.eps)
    out = {"verdict": "PASS" if ok else "FAIL", "gap": rep.gaps.tolist(), "payoffs": rep.payoffs.tolist()}
    if oracle_slack is not None:
        out["deviation_slack"] = oracle_slack
    text = [f"{out['verdict']} (eps = {args.eps:g})"]
    text += [f"player {i}: payoff {p:.6g}, gap {e:.3g}" for i, p, e in zip(sf.players, rep.payoffs, rep.gaps)]
    _emit(args, out, "\n".join(text))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    g, _ = _load(args.game)
    try:
        nf = build_reduced_normal_form(g)
    except OracleSizeError as exc:
        raise InputError(str(exc)) from None
    doc = {"strategies": {str(p): nf.labels(p) for p in range(1, nf.players + 1)},
           "payoffs": nf.payoffs.tolist()}
    text = [f"reduced normal form, shape {nf.shape}"]
    for p in range(1, nf.players + 1):
        text.append(f"player {p}: {' '.join(nf.labels(p))}")
    if not args.no_equilibria:
        try:
            eqs = enumerate_equilibria_small(nf, seed=args.seed)
        except OracleSizeError as exc:
            raise InputError(str(exc)) from None
        doc["equilibria"] = [{"sigma": [s.tolist() for s in e.sigma], "payoff": e.payoff.tolist()} for e in eqs]
        text.append(f"{len(eqs)} equilibria found")
        for e in eqs:
            mix = " | ".join(" ".join(f"{v:.4g}" for v in s) for s in e.sigma)
            text.append(f"  payoff ({', '.join(f'{v:.4g}' for v in e.payoff)})  sigma {mix}")
    _emit(args, doc, "\n".join(text))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        game = generate(GenSpec(args.type, args.n, args.depth, args.actions, seed=args.seed))
    except (ValueError, GameSizeError) as exc:
        raise InputError(str(exc)) from None
    Path(args.out).write_text(dump_game(game) + "\n", encoding="utf-8")
    sf = build_sequence_form(game)
    _emit(args, {"out": args.out, "dim": sf.unknown_dimension, "terminals": len(game.terminals)},
          f"wrote {args.out} ({len(game.terminals)} terminals, dimension {sf.unknown_dimension})")
    return EXIT_OK


def cmd_bench(args) -> int:
    doc = _read_json(args.config)
    if args.workers is not None:
        doc["workers"] = args.workers
    try:
        cfg = bench_mod.BenchConfig.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.config}: {exc}") from None
    report = bench_mod.run_bench(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench_report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "bench_summary.csv").write_text(report.to_csv(), encoding="utf-8")
    if args.json:
        print(report.to_json())
    else:
        print(report.to_csv(), end="")
    return EXIT_OK


def save_trace(path, sf, path_trace, meta: dict):
    cols = [f"gamma:{i}:{lab}" for i in sf.players for lab in sf.sequence_labels(i)[1:]]
    doc = {"meta": meta, "gamma_columns": cols, "points": [
        {"t": p.t, "step": p.step, "corrector_iters": p.corrector_iters, "residual": p.residual,
         "gamma": None if p.gamma is None else p.gamma.tolist()}
        for p in path_trace]}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def trace_json_to_csv(doc: dict) -> str:
    pts = doc.get("points") or []
    if not pts:
        raise InputError("trace has no points")
    cols = doc["gamma_columns"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "step", "corrector_iters", "residual", *cols])
    for p in pts:
        gam = p["gamma"] if p["gamma"] is not None else [float("nan")] * len(cols)
        w.writerow([repr(p["t"]), repr(p["step"]), p["corrector_iters"], repr(p["residual"]), *map(repr, gam)])
    return buf.getvalue()


def cmd_export_path(args) -> int:
    doc = _read_json(args.trace)
    text = trace_json_to_csv(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "export-path": cmd_export_path,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"efgpath: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
