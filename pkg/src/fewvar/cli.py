"""Command-line front end.

One binary, subcommand style.  Every report is line-oriented `key=value`
(or `key=v1,v2,...` CSV) with the seed echoed, so identical invocations
produce byte-identical output.  The `pit` subcommand exits 0 when a witness
is found, 1 when the polynomial vanished on the whole enumerated set, 2 when
the budget ran out first, and 3 on any error; the other subcommands use 0
for pass, 1 for a failed check, 3 for errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import shlex
import subprocess
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from .algebra import parse_poly, serialize_poly
from .circuit import expand_circuit, homogenize, parse_circuit, transform_audit
from .algebra import hom_component
from .measure import (
    MeasureParams,
    appendix_ratios,
    psd_dimension,
    survival_experiment,
)
from .nw import NWInstance, derive_nw_params, nw_check_properties
from .pit import (
    Blackbox,
    blackbox_from_circuit,
    derive_pit_params,
    pit_run,
    rs_design,
    schwartz_zippel,
    toy_pit_params,
    verify_design,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3


class _Parser(argparse.ArgumentParser):
    """argparse that exits 3 (not 2) on bad usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _pf(flag: bool) -> str:
    return "pass" if flag else "fail"


def _tf(flag: bool) -> str:
    return "true" if flag else "false"


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(lines: List[str], out: Optional[str]):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def _rational(text: str) -> Fraction:
    return Fraction(text)


def _csv_ints(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip() != ""]


# ---------------------------------------------------------------------------
# blackbox plumbing

class _SubprocessBox:
    """Line protocol: write the point as space-separated rationals, read one
    rational back.  The child is started once and fed one line per call."""

    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            shlex.split(command), stdin=subprocess.PIPE,
            stdout=subprocess.PIPE, text=True, bufsize=1)

    def __call__(self, point: Sequence) -> Fraction:
        line = " ".join(str(Fraction(v)) for v in point)
        assert self.proc.stdin is not None and self.proc.stdout is not None
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        reply = self.proc.stdout.readline()
        if not reply:
            raise RuntimeError("blackbox closed the pipe")
        return Fraction(reply.strip())

    def close(self):
        if self.proc.stdin:
            self.proc.stdin.close()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


def _load_box(args) -> tuple:
    """Build a Blackbox from --circuit or --blackbox; returns (box, cleanup)."""
    if args.circuit:
        C = parse_circuit(Path(args.circuit).read_text())
        if C.k is None and getattr(args, "k", None) is not None:
            C = dataclasses.replace(C, k=args.k)
        return C, None
    if getattr(args, "N", None) is None:
        raise ValueError("--blackbox mode needs --N")
    sub = _SubprocessBox(args.blackbox)
    box = Blackbox(fn=sub, num_vars=args.N, k=getattr(args, "k", None),
                   notes="subprocess")
    return box, sub.close


# ---------------------------------------------------------------------------
# subcommands

def _cmd_nw_params(args) -> int:
    p = derive_nw_params(args.mu, args.n)
    _emit([
        f"seed={args.seed}",
        f"mu={_num(p.mu)}",
        f"n={p.n}",
        f"delta={_num(p.delta)}",
        f"gamma={_num(p.gamma)}",
        f"psi={p.psi}",
        f"N={p.N}",
        f"rho={_num(p.rho)}",
        f"D_raw={_num(p.D_raw)}",
        f"D={p.D}",
    ], args.out)
    return EXIT_OK


def _cmd_nw_check(args) -> int:
    inst = NWInstance(n=args.n, psi=args.psi, D=args.D)
    r = nw_check_properties(inst)
    _emit([
        f"seed={args.seed}",
        f"psi={args.psi}",
        f"D={args.D}",
        f"n={args.n}",
        f"monomial_count={r.monomial_count}",
        f"expected_count={r.expected_count}",
        f"count={_pf(r.count_ok)}",
        f"multilinear={_pf(r.multilinear_ok)}",
        f"degree={_pf(r.degree_ok)}",
        f"max_intersection={r.max_intersection}",
        f"intersection_bound={r.intersection_bound}",
        f"intersections={_pf(r.intersection_ok)}",
        f"ok={_pf(r.ok)}",
    ], args.out)
    return EXIT_OK if r.ok else EXIT_CHECK_FAILED


def _cmd_design(args) -> int:
    d = rs_design(args.b, args.a, intersection_cap=args.cap)
    rep = verify_design(d, cap=args.cap)
    lines = [
        f"seed={args.seed}",
        f"b={d.b}",
        f"a={d.a}",
        f"q0={d.q0}",
        f"c0={d.c0}",
        f"l={d.l}",
        f"verify={_pf(rep.ok)}",
        f"max_intersection={rep.max_intersection}",
    ]
    lines += [f"set={','.join(str(v) for v in S)}" for S in d.sets]
    lines += [f"violation={v}" for v in rep.violations]
    _emit(lines, args.out)
    return EXIT_OK if rep.ok else EXIT_CHECK_FAILED


def _toy_or_derived_params(args, N: int, k: int):
    if args.override_l is not None:
        grid = args.override_grid
        return toy_pit_params(N, k, args.override_l, a_prime=args.a_prime,
                              q=args.q, D=args.D, grid=grid,
                              mu=float(args.mu), c=args.c)
    return derive_pit_params(args.mu, args.c, N, k)


def _params_lines(params, seed) -> List[str]:
    return [
        f"seed={seed}",
        f"N={params.N}",
        f"k={params.k}",
        f"l={params.l}",
        f"a={params.a}",
        f"a_prime={params.a_prime}",
        f"q={params.q}",
        f"D={params.D}",
        f"set_size={params.set_size}",
        f"grid_size={len(params.grid)}",
        f"stream_size={params.stream_size}",
    ]


def _cmd_hitset(args) -> int:
    from .pit import DEFAULT_STREAM_CAP, hitting_set_stream
    params = _toy_or_derived_params(args, args.N, args.k)
    limit = args.limit
    if limit is None:
        if params.stream_size > DEFAULT_STREAM_CAP:
            raise ValueError(
                f"stream has {params.stream_size} tuples; pass --limit")
        limit = params.stream_size
    lines = _params_lines(params, args.seed)
    for h in hitting_set_stream(params, limit=limit):
        lines.append("h=" + ",".join(_num(v) for v in h))
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_pit(args) -> int:
    box, cleanup = _load_box(args)
    try:
        N = box.num_vars
        k = box.k if box.k is not None else args.k
        if k is None:
            raise ValueError(
                "individual degree unknown: declare k in the circuit file or "
                "pass --k")
        params = _toy_or_derived_params(args, N, k)
        result = pit_run(box, params, budget=args.budget)
    finally:
        if cleanup:
            cleanup()
    lines = _params_lines(params, args.seed)
    if args.budget is not None:
        lines.append(f"budget={args.budget}")
    lines.append(f"status={result.status}")
    lines.append(f"tested={result.tested}")
    if result.point is not None:
        lines.append("witness=" + ",".join(_num(v) for v in result.point))
        lines.append(f"value={_num(result.value)}")
    if result.class_report is not None:
        lines.append(f"class={_pf(result.class_report.ok)}")
    _emit(lines, args.out)
    if result.status == "witness":
        return EXIT_OK
    if result.status == "zero-on-set":
        return EXIT_CHECK_FAILED
    return EXIT_INCONCLUSIVE


def _cmd_sz(args) -> int:
    box, cleanup = _load_box(args)
    try:
        if not isinstance(box, Blackbox):
            box = blackbox_from_circuit(box)
        result = schwartz_zippel(box, args.trials, args.domain, args.seed)
    finally:
        if cleanup:
            cleanup()
    lines = [
        f"seed={args.seed}",
        f"trials={result.trials}",
        f"domain={args.domain}",
        f"status={result.status}",
    ]
    if result.point is not None:
        lines.append("witness=" + ",".join(str(v) for v in result.point))
        lines.append(f"value={_num(result.value)}")
    _emit(lines, args.out)
    return EXIT_OK if result.found else EXIT_CHECK_FAILED


def _cmd_measure(args) -> int:
    P = parse_poly(Path(args.poly).read_text())
    params = MeasureParams(r=args.r, m=args.m, rank_prime=args.rank_prime)
    rep = psd_dimension(P, params, row_cap=args.row_cap)
    _emit([
        f"seed={args.seed}",
        f"r={args.r}",
        f"m={args.m}",
        f"phi={rep.phi}",
        f"rows={rep.rows}",
        f"cols={rep.cols}",
        f"exact={_tf(rep.exact)}",
    ], args.out)
    return EXIT_OK


def _cmd_homogenize(args) -> int:
    C = parse_circuit(Path(args.circuit).read_text())
    dec = homogenize(C, args.n)
    value = dec.value()
    try:
        expected = hom_component(expand_circuit(C, cap=args.expand_cap),
                                 args.n, "eq")
        identity = "pass" if value == expected else "fail"
    except ValueError:
        identity = "skipped"
    lines = [
        f"seed={args.seed}",
        f"n={args.n}",
        f"pieces={len(dec.pieces)}",
        f"identity={identity}",
    ]
    lines += serialize_poly(value).splitlines()
    _emit(lines, args.out)
    return EXIT_CHECK_FAILED if identity == "fail" else EXIT_OK


def _cmd_restrict_experiment(args) -> int:
    C = parse_circuit(Path(args.circuit).read_text())
    rep = survival_experiment(C, args.s, args.p, args.trials, args.seed)
    _emit([
        f"seed={rep.seed}",
        f"s={args.s}",
        f"p={_num(rep.p)}",
        f"trials={rep.trials}",
        f"bad_count={rep.bad_count}",
        f"expected_survivors={_num(rep.expected_survivors)}",
        f"mean_survivors={_num(rep.mean_survivors)}",
        f"stderr_survivors={_num(rep.stderr_survivors)}",
        f"empirical_rate={_num(rep.empirical_rate)}",
        f"markov_bound={_num(rep.markov_bound)}",
    ], args.out)
    return EXIT_OK


def _cmd_ratios(args) -> int:
    rep = appendix_ratios(args.n, args.mu, eps1=args.eps1, eps2=args.eps2)
    _emit([
        f"seed={args.seed}",
        f"n={rep.n}",
        f"mu={_num(rep.mu)}",
        f"r={rep.r}",
        f"s={rep.s}",
        f"m={rep.m}",
        f"N={rep.N}",
        f"log_ratio_1={_num(rep.log_ratio_1)}",
        f"log_ratio_2={_num(rep.log_ratio_2)}",
        f"closed_form_1={_num(rep.closed_form_1)}",
        f"exact={_tf(rep.exact)}",
    ], args.out)
    return EXIT_OK


def _cmd_transform_audit(args) -> int:
    rep = transform_audit(args.count, args.seed, num_vars=args.vars,
                          max_terms=args.terms, max_factors=args.factors,
                          max_support=args.support, max_k=args.max_k)
    lines = [
        f"seed={args.seed}",
        f"count={args.count}",
        f"circuits={rep.circuits}",
        f"checks={rep.checks}",
        f"failures={len(rep.failures)}",
        f"max_deriv_fanin_ratio={_num(rep.max_deriv_fanin_ratio)}",
        f"max_coeff_fanin_ratio={_num(rep.max_coeff_fanin_ratio)}",
        f"ok={_pf(rep.ok)}",
    ]
    lines += [f"failure={f}" for f in rep.failures]
    _emit(lines, args.out)
    return EXIT_OK if rep.ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser assembly

def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)


def _add_box_args(sp):
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", default=None)
    src.add_argument("--blackbox", default=None)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)


def _add_override_args(sp):
    sp.add_argument("--mu", type=_rational, default=Fraction(0))
    sp.add_argument("--c", type=float, default=3.0)
    sp.add_argument("--override-l", dest="override_l", type=int, default=None)
    sp.add_argument("--override-grid", dest="override_grid", type=_csv_ints,
                    default=None)
    sp.add_argument("--a-prime", dest="a_prime", type=int, default=1)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--D", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fewvar", description=__doc__)
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = subs.add_parser("nw-params")
    sp.add_argument("--mu", type=_rational, required=True)
    sp.add_argument("--n", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_nw_params)

    sp = subs.add_parser("nw-check")
    sp.add_argument("--psi", type=int, required=True)
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_nw_check)

    sp = subs.add_parser("design")
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--cap", type=int, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_design)

    sp = subs.add_parser("hitset")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--limit", type=int, default=None)
    _add_override_args(sp)
    _add_common(sp)
    sp.set_defaults(func=_cmd_hitset)

    sp = subs.add_parser("pit")
    _add_box_args(sp)
    sp.add_argument("--budget", type=int, default=None)
    _add_override_args(sp)
    _add_common(sp)
    sp.set_defaults(func=_cmd_pit)

    sp = subs.add_parser("sz")
    _add_box_args(sp)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--domain", type=int, default=10)
    _add_common(sp)
    sp.set_defaults(func=_cmd_sz)

    sp = subs.add_parser("measure")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--rank-prime", dest="rank_prime", type=int, default=None)
    sp.add_argument("--row-cap", dest="row_cap", type=int, default=200_000)
    _add_common(sp)
    sp.set_defaults(func=_cmd_measure)

    sp = subs.add_parser("homogenize")
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--expand-cap", dest="expand_cap", type=int, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_homogenize)

    sp = subs.add_parser("restrict-experiment")
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--trials", type=int, default=100)
    _add_common(sp)
    sp.set_defaults(func=_cmd_restrict_experiment)

    sp = subs.add_parser("ratios")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mu", type=_rational, default=Fraction(0))
    sp.add_argument("--eps1", type=float, default=None)
    sp.add_argument("--eps2", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_ratios)

    sp = subs.add_parser("transform-audit")
    sp.add_argument("--count", type=int, default=25)
    sp.add_argument("--vars", type=int, default=10)
    sp.add_argument("--terms", type=int, default=4)
    sp.add_argument("--factors", type=int, default=4)
    sp.add_argument("--support", type=int, default=3)
    sp.add_argument("--max-k", dest="max_k", type=int, default=3)
    _add_common(sp)
    sp.set_defaults(func=_cmd_transform_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as e:          # noqa: BLE001  (single reporting point)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
