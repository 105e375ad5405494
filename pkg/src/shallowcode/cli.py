"""Command-line entry point: ``shallowcode <command> ...``.

Exit status is 0 on success or pass, 1 when a check fails with a witness and 2
on usage or precondition errors.  Errors are printed to stderr as JSON
``{"code", "message", "witness"?}``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ackermann as ack
from . import codec
from .channel import capacity, load_channel
from .circuit import LinearCircuit
from .disperser import BipartiteGraph, find_disperser, sample_left_regular, verify_disperser, verify_disperser_sampled
from .errors import ShallowCodeError
from .gadgets import GadgetConfig, RangeDetectorSpec, check_detector, verify_range_detector
from .rng import Stream
from .typical import TypicalParams, count_typical, mass_outside_typical


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonable)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialise {type(v)}")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _eps(value: str, channel, n: int) -> float:
    return codec.default_eps(channel, n) if value == "auto" else float(value)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


# --- commands ------------------------------------------------------------------

def cmd_build(args) -> int:
    ch = load_channel(args.channel)
    cfg = codec.CodecConfig(depth=args.depth, gadgets=GadgetConfig(max_tries=args.max_tries))
    inst = codec.build_capacity_code(ch, args.rate, args.n, args.gamma, args.seed, cfg, args.allow_above_capacity)
    if args.out:
        _write(args.out, _dump(inst.to_json()) + "\n")
    report = dict(inst.meta, k=inst.k, n=inst.n, alpha_n=ack.alpha(args.n),
                  wires_per_n=inst.encoder.wire_count() / args.n)
    if args.report:
        _write(args.report, _dump(report) + "\n")
    print(f"k={inst.k} n={inst.n} wires={report['wires']} depth={report['depth']} "
          f"alpha(n)={report['alpha_n']} wires/n={report['wires_per_n']:.12g}")
    return 0


def _simulate_rows(inst, ch, eps, gamma, trials, messages, seed, threads):
    if trials <= 0:
        return []
    est = codec.failure_prob_mc(inst, ch, eps, messages, trials, Stream(seed), threads)
    return [codec.csv_row(inst, eps, gamma, m, trials) for m in est.per_message]


def cmd_simulate(args) -> int:
    ch = load_channel(args.channel)
    inst = codec.CodeInstance.from_json(_load_json(args.code))
    eps = _eps(args.eps, ch, inst.n)
    gamma = float(inst.meta.get("gamma", 0.0))
    print(f"simulating n={inst.n} k={inst.k} trials={args.trials}", file=sys.stderr)
    rows = _simulate_rows(inst, ch, eps, gamma, args.trials, args.messages, args.seed, args.threads)
    _write(args.out, codec.write_csv(rows))
    return 0


def cmd_sweep(args) -> int:
    ch = load_channel(args.channel)
    cfg = codec.CodecConfig(depth=args.depth, gadgets=GadgetConfig(max_tries=args.max_tries))
    rows = []
    for rate in _floats(args.rates):
        for n in _ints(args.ns):
            inst = codec.build_capacity_code(ch, rate, n, args.gamma, args.seed, cfg, args.allow_above_capacity)
            eps = _eps(args.eps, ch, n)
            print(f"rate={rate} n={n} k={inst.k}", file=sys.stderr)
            rows += _simulate_rows(inst, ch, eps, args.gamma, args.trials, args.messages, args.seed, args.threads)
    _write(args.out, codec.write_csv(rows))
    return 0


def cmd_verify(args) -> int:
    circuit = LinearCircuit.from_json(_load_json(args.circuit))
    spec = RangeDetectorSpec.parse(args.spec)
    if args.sampled:
        verdict = check_detector(circuit, spec, Stream(args.seed))
    else:
        verdict = verify_range_detector(circuit, spec)
    if verdict.ok:
        print(f"pass {verdict.status} checked={verdict.checked}")
        return 0
    print(_dump({"code": "VerificationFailed", "message": "output weight out of range",
                 "witness": list(verdict.witness)}), file=sys.stderr)
    print("fail")
    return 1


def cmd_disperser(args) -> int:
    stream = Stream(args.seed)
    if args.graph:
        g = BipartiteGraph.from_json(_load_json(args.graph))
        if args.sampled:
            verdict = verify_disperser_sampled(g, args.gamma, args.eps, stream)
        else:
            verdict = verify_disperser(g, args.gamma, args.eps)
        if verdict.ok:
            print(f"pass {'exhaustive' if verdict.exhaustive else 'sampled'} checked={verdict.checked}")
            return 0
        print(_dump({"code": "VerificationFailed", "message": "neighbourhood too small",
                     "witness": list(verdict.witness)}), file=sys.stderr)
        print("fail")
        return 1
    if args.left is None or args.right is None or args.degree is None:
        raise SystemExit(_usage_error("disperser needs --graph or --left/--right/--degree"))
    if args.find:
        g = find_disperser(args.left, args.right, args.degree, args.gamma, args.eps, stream, args.max_tries)
    else:
        g = sample_left_regular(args.left, args.right, args.degree, stream)
    _write(args.out, g.dumps() + "\n")
    if g.meta:
        print(_dump(g.meta), file=sys.stderr)
    return 0


def cmd_ackermann(args) -> int:
    if args.alpha is not None:
        print(ack.alpha(args.alpha))
    elif args.lam is not None:
        print(ack.lam(args.lam[0], args.lam[1]))
    elif args.A is not None:
        print(ack.ackermann(args.A[0], args.A[1], args.cap))
    else:
        raise SystemExit(_usage_error("ackermann needs --alpha, --lambda or --A"))
    return 0


def cmd_channel(args) -> int:
    ch = load_channel(args.path)
    print(_dump({"q": ch.q, "capacity_bits": round(capacity(ch), 12),
                 "posterior0": [round(float(v), 12) for v in ch.posterior0],
                 "sigma": ch.sigma.tolist()}))
    return 0


def cmd_typical(args) -> int:
    ch = load_channel(args.channel)
    params = TypicalParams(ch, args.n, args.eps)
    if args.what == "count":
        print(count_typical(params))
    else:
        est = mass_outside_typical(params, args.trials, Stream(args.seed), exact=args.exact)
        print(_dump({"estimate": round(est.estimate, 12), "stderr": round(est.stderr, 12),
                     "trials": est.trials, "chernoff": round(est.chernoff, 12), "exact": est.exact}))
    return 0


# --- parser --------------------------------------------------------------------

def _usage_error(message: str) -> int:
    print(_dump({"code": "Usage", "message": message}), file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shallowcode", description="Shallow linear circuits for capacity-approaching codes.")
    p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    sub = p.add_subparsers(dest="command", required=True)

    def common_build(sp):
        sp.add_argument("--channel", required=True)
        sp.add_argument("--gamma", type=float, default=0.05)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--depth", type=int, default=4)
        sp.add_argument("--max-tries", type=int, default=200)
        sp.add_argument("--allow-above-capacity", action="store_true")

    b = sub.add_parser("build", help="build a code and report its circuit metrics")
    common_build(b)
    b.add_argument("--rate", type=float, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--out", help="code file (JSON)")
    b.add_argument("--report", help="build report (JSON)")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="Monte Carlo failure rate of a code file")
    s.add_argument("--code", required=True)
    s.add_argument("--channel", required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--messages", type=int, default=1)
    s.add_argument("--eps", default="auto")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="build and simulate over rates x lengths")
    common_build(w)
    w.add_argument("--rates", required=True, help="comma separated")
    w.add_argument("--ns", required=True, help="comma separated")
    w.add_argument("--trials", type=int, default=1000)
    w.add_argument("--messages", type=int, default=1)
    w.add_argument("--eps", default="auto")
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="check a circuit as a range detector")
    v.add_argument("--circuit", required=True)
    v.add_argument("--spec", required=True, help="m_in,n_out,ell,k,r[,s]")
    v.add_argument("--sampled", action="store_true", help="allow sampled checking above the exhaustive cap")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("disperser", help="sample, search for or verify a disperser")
    d.add_argument("--graph", help="graph file to verify")
    d.add_argument("--left", type=int)
    d.add_argument("--right", type=int)
    d.add_argument("--degree", type=int)
    d.add_argument("--gamma", type=float, default=0.125)
    d.add_argument("--eps", type=float, default=0.05)
    d.add_argument("--find", action="store_true", help="Las Vegas search instead of a single sample")
    d.add_argument("--sampled", action="store_true")
    d.add_argument("--max-tries", type=int, default=200)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_disperser)

    a = sub.add_parser("ackermann", help="lambda_d, alpha and A(i, j)")
    a.add_argument("--alpha", type=int)
    a.add_argument("--lambda", dest="lam", type=int, nargs=2, metavar=("D", "N"))
    a.add_argument("--A", type=int, nargs=2, metavar=("I", "J"))
    a.add_argument("--cap", type=int, default=1 << 64)
    a.set_defaults(func=cmd_ackermann)

    c = sub.add_parser("channel", help="validate a channel file and print its capacity")
    c.add_argument("--info", dest="path", required=True)
    c.set_defaults(func=cmd_channel)

    t = sub.add_parser("typical", help="typical-set size or mass outside it")
    t.add_argument("what", choices=["count", "mass"])
    t.add_argument("--channel", required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--eps", type=float, required=True)
    t.add_argument("--trials", type=int, default=0)
    t.add_argument("--exact", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_typical)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "threads") and args.threads < 1:
        return _usage_error("--threads must be positive")
    try:
        return args.func(args)
    except ShallowCodeError as exc:
        print(_dump(exc.to_json()), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(_dump({"code": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
