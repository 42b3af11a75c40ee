"""Command-line interface: ``fewcopy {translate,simulate,analyze,bound,ingest}``.

Exit codes: 0 success (and conclusive, for ``analyze``), 2 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .bound import DEFAULT_RESTARTS, DEFAULT_TOL, fullsep_bound
from .errors import ConfigError, FewCopyError
from .protocol import OutcomeRecord, analyze, run_protocol
from .states import Graph, StateSource, build_state, cluster6, graph_state, stabilizer_group
from .witness import MeasurementSet, builtin_w1, builtin_w2, graph_witness, translate

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


def resolve_witness(selector: str):
    """Map ``w1 | w2 | graph:<file> | custom:<file>`` to (set, default target state)."""
    if selector == "w1":
        return builtin_w1(), cluster6()
    if selector == "w2":
        return builtin_w2(), cluster6()
    kind, _, path = selector.partition(":")
    if kind == "graph" and path:
        d = io.load_json(path)
        try:
            g = Graph(int(d["n"]), frozenset(tuple(e) for e in d["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad graph description ({exc})") from None
        mset = graph_witness(stabilizer_group(g.generators()), p_s_full=d.get("p_s_full"))
        return mset, graph_state(g)
    if kind == "custom" and path:
        d = io.load_json(path)
        if isinstance(d, dict) and d.get("type") == "measurement-set":
            return io.set_from_dict(d, path), None
        return translate(io.witness_from_dict(d, path)), None
    raise ConfigError(f"unknown witness selector {selector!r}; use w1, w2, graph:<file> or custom:<file>")


def _load_set(args) -> MeasurementSet:
    if getattr(args, "set", None):
        return io.load_set(args.set)
    if getattr(args, "witness", None):
        return resolve_witness(args.witness)[0]
    raise ConfigError("give --set FILE or --witness SELECTOR")


def resolve_seed(seed: int | None) -> tuple[int, bool]:
    """Seed from the flag, then FEWCOPY_SEED, then the OS. Second item: was it generated."""
    if seed is not None:
        return seed, False
    env = os.environ.get("FEWCOPY_SEED")
    if env:
        try:
            return int(env), False
        except ValueError:
            raise ConfigError(f"FEWCOPY_SEED={env!r} is not an integer") from None
    return int(np.random.SeedSequence().entropy % 2**63), True


def _seed(args) -> int:
    seed, generated = resolve_seed(args.seed)
    if generated:
        print(f"seed = {seed}", file=sys.stderr)
    return seed


def _build_source(args, target) -> StateSource:
    src = args.source
    if src.endswith(".json") or Path(src).is_file():
        return StateSource.from_config(io.load_json(src))
    if args.state:
        base = build_state(json.loads(args.state) if args.state.startswith("{") else {"name": args.state})
    elif target is not None:
        base = target
    else:
        raise ConfigError("this witness has no default target state; pass --state or a --source config file")
    if src in ("constant", "ideal"):
        return StateSource.constant(base)
    if src == "white-noise":
        if args.visibility is None:
            raise ConfigError("--source white-noise needs --visibility")
        return StateSource.white_noise(base, args.visibility)
    if src == "local-dephasing":
        if args.dephasing is None:
            raise ConfigError("--source local-dephasing needs --dephasing")
        return StateSource.local_dephasing(base, args.dephasing)
    raise ConfigError(f"unknown source {src!r}; use constant, white-noise, local-dephasing or a JSON file")


def cmd_translate(args) -> int:
    if args.witness_file:
        mset = translate(io.load_witness(args.witness_file))
    elif args.witness:
        mset = resolve_witness(args.witness)[0]
    else:
        raise ConfigError("give a witness file or --witness")
    fmt = lambda x: "n/a" if x is None else f"{x:.6g}"
    print(f"L = {len(mset)}")
    print(f"tau = {fmt(mset.tau)}")
    print(f"a = {fmt(mset.shift)}")
    print(f"p_s = {mset.p_s_full:.6f}")
    if mset.p_s_bisep is not None:
        print(f"p_s_bisep = {mset.p_s_bisep:.6f}")
    if mset.p_e is not None:
        print(f"p_e = {mset.p_e:.6f}")
    if args.out:
        io.save_set(mset, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.rounds < 1:
        raise ConfigError("--rounds must be >= 1")
    if args.set:
        mset, target = io.load_set(args.set), None
    else:
        mset, target = resolve_witness(args.witness)
    src = _build_source(args, target)
    seed = _seed(args)
    meta = {"seed": seed, "source": src.describe() if src.config else {"kind": src.kind, "cli": args.source}}
    if src.config is None:
        meta["source"].update({k: v for k, v in (("visibility", args.visibility),
                                                  ("dephasing", args.dephasing),
                                                  ("state", args.state)) if v is not None})
    rec = run_protocol(src, mset, args.rounds, np.random.default_rng(seed), meta)
    rec.save(args.out)
    if args.set_out:
        io.save_set(mset, args.set_out)
    print(f"wrote {rec.N} rounds (S = {rec.S}) to {args.out}")
    return EXIT_OK


def _print_bound(label: str, p_s: float, delta: float, conf: float, conclusive: bool) -> None:
    verdict = "conclusive" if conclusive else "inconclusive"
    print(f"[{label}] p_s = {p_s:.6f}  delta = {delta:+.6f}  C_min = {conf:.4f}  {verdict}")


def cmd_analyze(args) -> int:
    mset = _load_set(args)
    rec = OutcomeRecord.load(args.record)
    p_full = None
    if args.bound == "numeric":
        res = fullsep_bound(mset, args.restarts, args.tol, _seed(args))
        p_full = res.value
        print(f"numeric full-separability estimate = {p_full:.6f}")
        if abs(p_full - mset.p_s_full) > 1e-6:
            print("warning: the numeric estimate is a lower bound on the separable maximum and does not "
                  f"match the set's stated bound {mset.p_s_full:.6f}; confidence may be overstated",
                  file=sys.stderr)
    rep = analyze(rec, mset, p_s_full=p_full)
    print(f"N = {rep.N}")
    print(f"S = {rep.S}")
    print(f"p_obs = {rep.p_obs:.6f}")
    verdicts = []
    if args.bound in ("full", "both", "numeric"):
        _print_bound("full", mset.p_s_full if p_full is None else p_full,
                     rep.delta_full, rep.confidence_full, rep.conclusive_full)
        verdicts.append(rep.conclusive_full)
    if args.bound == "bisep" and rep.delta_bisep is None:
        raise ConfigError("this set has no biseparable bound")
    if args.bound in ("bisep", "both") and rep.delta_bisep is not None:
        _print_bound("bisep", mset.p_s_bisep, rep.delta_bisep, rep.confidence_bisep, rep.conclusive_bisep)
        verdicts.append(rep.conclusive_bisep)
    if rep.fidelity is not None:
        print(f"F = {rep.fidelity[0]:.4f} ± {rep.fidelity[1]:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps(rep.to_dict(), indent=1) + "\n")
    if args.curve_out:
        io.write_curve_csv(args.curve_out, rep.curve)
    if not all(verdicts):
        print("inconclusive")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_bound(args) -> int:
    mset = _load_set(args)
    res = fullsep_bound(mset, args.restarts, args.tol, _seed(args))
    print(f"p_fs estimate = {res.value:.6f}")
    print(f"converged = {res.converged}")
    print(f"restarts = {res.restarts_used}")
    for q, b in enumerate(res.argmax):
        print(f"qubit {q}: bloch = ({b[0]:+.6f}, {b[1]:+.6f}, {b[2]:+.6f})")
    print("warning: see-saw returns a lower estimate of the true separable maximum", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(json.dumps(res.to_dict(), indent=1) + "\n")
    return EXIT_OK


def cmd_ingest(args) -> int:
    mset = _load_set(args)
    settings, outcomes, stamps, skipped = io.read_external_csv(args.csv, len(mset))
    meta = {"source": {"kind": "external", "file": Path(args.csv).name}, "skipped_rows": skipped}
    if stamps is not None:
        meta["timestamps"] = stamps
    rec = OutcomeRecord(io.set_id(mset), settings, outcomes, meta)
    rec.save(args.out)
    print(f"ingested {rec.N} rounds, skipped {skipped} rows with no outcome")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fewcopy", description="Few-copy probabilistic entanglement verification")
    sub = p.add_subparsers(dest="command", required=True)

    def set_args(sp):
        sp.add_argument("--set", help="measurement-set JSON file")
        sp.add_argument("--witness", help="w1, w2, graph:<file> or custom:<file>")

    def seed_arg(sp):
        sp.add_argument("--seed", type=int, default=None, help="master seed (fallback: $FEWCOPY_SEED)")

    sp = sub.add_parser("translate", help="witness -> measurement set")
    sp.add_argument("witness_file", nargs="?")
    sp.add_argument("--witness")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_translate)

    sp = sub.add_parser("simulate", help="run the protocol on a simulated source")
    set_args(sp)
    sp.add_argument("--source", default="constant",
                    help="constant | white-noise | local-dephasing | path to a source JSON config")
    sp.add_argument("--state", help="base state name or JSON spec (default: the witness target)")
    sp.add_argument("--visibility", type=float, default=None)
    sp.add_argument("--dephasing", type=float, default=None)
    sp.add_argument("-N", "--rounds", type=int, required=True)
    seed_arg(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--set-out")
    sp.set_defaults(func=cmd_simulate, witness="w2")

    sp = sub.add_parser("analyze", help="confidence report for an outcome record")
    sp.add_argument("record")
    set_args(sp)
    sp.add_argument("--bound", choices=("full", "bisep", "both", "numeric"), default="both")
    sp.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    seed_arg(sp)
    sp.add_argument("--out")
    sp.add_argument("--curve-out")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("bound", help="numerical full-separability bound")
    set_args(sp)
    sp.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    seed_arg(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("ingest", help="external CSV -> outcome record")
    sp.add_argument("csv")
    set_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_ingest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FewCopyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
