"""Command-line front end.

Exit codes: 0 success, 1 law violation, 2 usage or input-format error,
3 mathematically invalid input (non-stochastic, non-Hermitian, ...).
Machine output goes to ``--out`` (or stdout when absent); the human summary
goes to stdout, or to stderr when stdout carries the data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import calgebra as ca
from . import choquet as ch
from . import finstoch as fs
from . import kernels as kn
from . import quantum as qu
from .errors import InputFormatError, InvariantViolation
from .laws import run_laws

DEFAULT_SEED = 42

BUILTIN_STATES = {"up": qu.UP, "down": qu.DOWN, "plus": qu.PLUS, "minus": qu.MINUS, "mixed": np.eye(2) / 2}
BUILTIN_OBSERVABLES = {"sz": qu.SIGMA_Z, "sx": qu.SIGMA_X, "sy": qu.SIGMA_Y, "id": np.eye(2)}


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    params: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"

    def validate(self):
        tol = self.params.get("tol")
        if tol is not None and not tol > 0:
            raise InputFormatError("--tol must be positive")
        steps = self.params.get("steps")
        if steps is not None and steps < 0:
            raise InputFormatError("--steps must be non-negative")
        for name, path in self.inputs.items():
            if path is not None and not Path(path).exists():
                raise InputFormatError(f"{name} file {path!r} does not exist")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputFormatError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: invalid JSON ({e})") from None


class _Output:
    def __init__(self, out: str | None):
        self.path = out

    def write(self, text: str):
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)

    def summary(self, text: str):
        print(text, file=sys.stdout if self.path else sys.stderr)


def _matrix_arg(spec: str, builtins: dict) -> np.ndarray:
    if spec in builtins:
        return np.asarray(builtins[spec], dtype=complex)
    return qu.matrix_from_dict(_load_json(spec))


# --- markov -----------------------------------------------------------------


def _markov_inputs(args) -> tuple[fs.StochMatrix, fs.ProbDist]:
    if args.matrix:
        f = fs.StochMatrix.from_dict(_load_json(args.matrix))
    elif args.builtin == "heat":
        f = fs.heat_matrix(args.points or 20)
    elif args.builtin == "walk":
        f = fs.random_walk_circle(args.points or 4)
    else:
        raise InputFormatError("give --builtin heat|walk or --matrix FILE")
    if args.init:
        p0 = fs.ProbDist.from_dict(_load_json(args.init))
    else:
        start = f.domain.labels[f.domain.size // 2] if args.builtin == "heat" else f.domain.labels[0]
        p0 = fs.ProbDist.dirac(f.domain, start)
    return f, p0


def cmd_markov(args) -> int:
    RunConfig("markov", {"matrix": args.matrix, "init": args.init}, {"steps": args.steps}, args.out).validate()
    f, p0 = _markov_inputs(args)
    traj = fs.trajectory(f, p0, args.steps)
    out = _Output(args.out)
    if args.format == "json":
        out.write(json.dumps([p.to_dict() for p in traj], indent=1) + "\n")
    else:
        out.write(fs.trajectory_csv(traj))
    uniform = 1.0 / f.domain.size
    out.summary(f"steps={args.steps} sup_distance_to_uniform={_fmt(np.abs(traj[-1].weights - uniform).max())}")
    return 0


def cmd_heat_demo(args) -> int:
    args.builtin, args.matrix, args.init = "heat", None, None
    return cmd_markov(args)


# --- lawcheck ---------------------------------------------------------------


def cmd_lawcheck(args) -> int:
    RunConfig("lawcheck", {"inject": args.inject}, {"tol": args.tol}).validate()
    extra, failures = [], []
    if args.inject:
        try:
            extra.append(fs.StochMatrix.from_dict(_load_json(args.inject)))
        except InvariantViolation as e:
            failures.append(("stochmatrix_validation", str(e)))
    results = run_laws(args.seed, args.trials, args.max_size, args.tol, extra)
    for r in results:
        print(f"{r.name:40s} max_dev={r.deviation:.3e} {'PASS' if r.passed else 'FAIL'}")
    for name, msg in failures:
        print(f"{name:40s} {msg} FAIL")
    failed = [r.name for r in results if not r.passed] + [n for n, _ in failures]
    if failed:
        print("violated laws: " + ", ".join(failed))
        return 1
    print(f"all {len(results)} laws hold within {args.tol:g}")
    return 0


# --- duality ----------------------------------------------------------------


def cmd_duality(args) -> int:
    RunConfig("duality", {"input": args.input}).validate()
    f = fs.StochMatrix.from_dict(_load_json(args.input))
    phi = ca.functor_C(f)
    back = ca.stochastic_spectrum_fd(phi)
    err = float(np.abs(back.entries - f.entries).max())
    print(f"max_roundtrip_error={err:.3e}")
    print(f"star_homomorphism={ca.is_star_homomorphism(phi)}")
    if args.out:
        Path(args.out).write_text(json.dumps(phi.to_dict(), indent=1) + "\n")
    return 0


# --- quantum ----------------------------------------------------------------


def _channel(args) -> qu.KrausChannel:
    if args.builtin:
        name, _, param = args.builtin.partition(":")
        if name != "bitflip":
            raise InputFormatError(f"unknown builtin channel {name!r}")
        try:
            p = float(param) if param else 0.5
        except ValueError:
            raise InputFormatError(f"bad bit flip parameter {param!r}") from None
        return qu.bit_flip_channel(p)
    if args.kraus:
        return qu.KrausChannel.from_dict(_load_json(args.kraus))
    raise InputFormatError("give --builtin bitflip:P or --kraus FILE")


def _state(spec: str) -> qu.DensityMatrix:
    return qu.DensityMatrix(_matrix_arg(spec, BUILTIN_STATES))


def _write_density(out: _Output, rho: qu.DensityMatrix, fmt: str | None):
    if fmt != "csv":
        out.write(json.dumps(rho.to_dict()) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "re", "im"])
    for (i, j), v in np.ndenumerate(rho.matrix):
        w.writerow([i, j, _fmt(v.real), _fmt(v.imag)])
    out.write(buf.getvalue())


def cmd_quantum(args) -> int:
    out = _Output(args.out)
    if args.action == "channel":
        K = _channel(args)
        rho = _state(args.state)
        for _ in range(args.steps):
            rho = qu.apply_channel_schrodinger(K, rho)
        _write_density(out, rho, args.format)
        out.summary(f"trace={_fmt(np.trace(rho.matrix).real)} cp={qu.is_completely_positive(qu.choi_matrix(K))}")
    elif args.action == "measure":
        a = _matrix_arg(args.observable, BUILTIN_OBSERVABLES)
        p = qu.measure(a, _state(args.state))
        if args.format == "json":
            out.write(json.dumps(p.to_dict()) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["eigenvalue", "probability"])
            for lam, pr in zip(p.space.labels, p.weights):
                w.writerow([lam, _fmt(pr)])
            out.write(buf.getvalue())
    elif args.action == "evolve":
        h = _matrix_arg(args.h, BUILTIN_OBSERVABLES)
        rho = _state(args.state)
        if args.steps:
            res = qu.liouville_evolve(h, args.t, rho, args.steps)
        else:
            res = qu.unitary_evolution(h, args.t, rho)
        _write_density(out, res, args.format)
    return 0


# --- vague ------------------------------------------------------------------


def _parse_tests(spec: str) -> dict:
    kind, _, deg = spec.partition(":")
    if kind != "poly":
        raise InputFormatError(f"unknown test family {kind!r}")
    try:
        return kn.poly_tests(int(deg or 3))
    except ValueError:
        raise InputFormatError(f"bad polynomial degree {deg!r}") from None


def cmd_vague(args) -> int:
    tests = _parse_tests(args.tests)
    ns = list(range(1, args.n_max + 1, args.n_step))
    if ns[-1] != args.n_max:
        ns.append(args.n_max)
    if args.sequence == "uniform":
        seq = {n: kn.uniform_dirac_sequence(n) for n in ns}
        limit = kn.lebesgue(0.0, 1.0)
    elif args.sequence == "gaussian":
        seq = {n: kn.gaussian_dirac_approx(n) for n in ns}
        limit = kn.gaussian_limit()
    else:
        raise InputFormatError(f"unknown builtin sequence {args.sequence!r}")
    report = kn.vague_convergence_report(seq, limit, tests)
    out = _Output(args.out)
    if args.format == "json":
        out.write(json.dumps([{"n": n, "test_id": t, "gap": g} for n, t, g in report.rows]) + "\n")
    else:
        out.write(report.to_csv())
    out.summary(f"n={args.n_max} final_max_gap={_fmt(report.max_final_gap())} {report.verdict(args.tol)}")
    if args.sets:
        out.summary("n,mu_n(Q),lebesgue(Q)")
        for n, a, b in kn.rational_set_table(ns):
            out.summary(f"{n},{_fmt(a)},{_fmt(b)}")
        demo = kn.open_set_demo()
        out.summary("k,x_k,delta_xk(U),delta_limit(U),max_test_gap")
        for k, x, a, b, g in demo.rows:
            out.summary(f"{k},{_fmt(x)},{_fmt(a)},{_fmt(b)},{_fmt(g)}")
    return 0


# --- choquet ----------------------------------------------------------------


def cmd_choquet(args) -> int:
    out = _Output(args.out)
    if args.action == "decompose":
        d = ch.decompose_state(fs.ProbDist.from_dict(_load_json(args.state)))
        if args.format == "json":
            out.write(json.dumps(d.as_dict()) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["character", "weight"])
            for c, wt in zip(d.characters, d.weights):
                w.writerow([repr(c), _fmt(wt)])
            out.write(buf.getvalue())
    else:
        phi = ca.DiagMap.from_dict(_load_json(args.map))
        out.write(json.dumps(ch.spectrum_as_matrix(phi).to_dict()) + "\n")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)

    p = argparse.ArgumentParser(prog="stochmaps", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("markov", parents=[common], help="iterate a stochastic matrix")
    m.add_argument("--builtin", choices=("heat", "walk"))
    m.add_argument("--matrix")
    m.add_argument("--init")
    m.add_argument("--points", type=int)
    m.add_argument("--steps", type=int, default=10)
    m.set_defaults(func=cmd_markov)

    hd = sub.add_parser("heat-demo", parents=[common], help="heat diffusion from a point source")
    hd.add_argument("--points", type=int, default=20)
    hd.add_argument("--steps", type=int, default=100)
    hd.set_defaults(func=cmd_heat_demo)

    lc = sub.add_parser("lawcheck", parents=[common], help="randomized law suite")
    lc.add_argument("--trials", type=int, default=200)
    lc.add_argument("--max-size", type=int, default=8)
    lc.add_argument("--tol", type=float, default=1e-12)
    lc.add_argument("--inject", help="stochastic-matrix JSON to validate and include")
    lc.set_defaults(func=cmd_lawcheck)

    du = sub.add_parser("duality", help="functor round trip")
    du_sub = du.add_subparsers(dest="action", required=True)
    rt = du_sub.add_parser("roundtrip", parents=[common])
    rt.add_argument("--input", required=True)
    rt.set_defaults(func=cmd_duality)

    qp = sub.add_parser("quantum", help="channels, measurement, evolution")
    q_sub = qp.add_subparsers(dest="action", required=True)
    qc = q_sub.add_parser("channel", parents=[common])
    qc.add_argument("--builtin")
    qc.add_argument("--kraus")
    qc.add_argument("--state", required=True)
    qc.add_argument("--steps", type=int, default=1)
    qc.set_defaults(func=cmd_quantum)
    qm = q_sub.add_parser("measure", parents=[common])
    qm.add_argument("--observable", required=True)
    qm.add_argument("--state", required=True)
    qm.set_defaults(func=cmd_quantum)
    qe = q_sub.add_parser("evolve", parents=[common])
    qe.add_argument("--h", required=True)
    qe.add_argument("--t", type=float, required=True)
    qe.add_argument("--state", required=True)
    qe.add_argument("--steps", type=int, default=0, help="RK4 steps; 0 uses the exact propagator")
    qe.set_defaults(func=cmd_quantum)

    vc = sub.add_parser("vague-check", parents=[common], help="vague convergence of Dirac sequences")
    vc.add_argument("--sequence", required=True)
    vc.add_argument("--n-max", type=int, default=100)
    vc.add_argument("--n-step", type=int, default=1)
    vc.add_argument("--tests", default="poly:3")
    vc.add_argument("--tol", type=float, default=1e-3)
    vc.add_argument("--sets", action="store_true", help="print the set-evaluation discontinuity tables")
    vc.set_defaults(func=cmd_vague)

    cq = sub.add_parser("choquet", help="state decomposition and stochastic spectrum")
    c_sub = cq.add_subparsers(dest="action", required=True)
    cd = c_sub.add_parser("decompose", parents=[common])
    cd.add_argument("--state", required=True)
    cd.set_defaults(func=cmd_choquet)
    cs = c_sub.add_parser("spectrum", parents=[common])
    cs.add_argument("--map", required=True)
    cs.set_defaults(func=cmd_choquet)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InvariantViolation as e:
        print(f"invalid input ({type(e).__name__}): {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
