"""Command-line front end.

Subcommands: ``gen``, ``singvals``, ``lowrank-error``, ``rpca``,
``image-approx`` and ``flops``. Diagnostics go to stderr. Exit codes: 0
success (a non-converged solve only warns), 2 usage error, 3 I/O error,
4 numeric precondition failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import io
from .baselines import qrcp_rank_k, sor_svd, svd_rank_k, tsr_svd, tsr_svd_rank_k
from .matcore import ParameterError, RngSeed, ShapeError, qrcp, svd
from .rpca import INNER, RpcaConfig, alm_rpca
from .testgen import gen_fast_decay, gen_noisy_lowrank, gen_rpca_instance
from .utv import corutv, flop_estimate, singular_estimates, truncate_rank_k

log = logging.getLogger("corutv")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(Exception):
    """A file could not be read or written."""


def parse_seed(text: str) -> RngSeed:
    """``"S"`` or ``"S:STREAM"`` as an :class:`RngSeed`."""
    parts = text.split(":")
    try:
        values = [int(p, 0) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None
    if len(values) > 2 or any(not 0 <= v < 2**64 for v in values):
        raise argparse.ArgumentTypeError(f"bad seed {text!r}")
    return RngSeed(*values)


def parse_ranks(text: str) -> list[int]:
    """``"a:b"`` (inclusive), ``"a:b:step"`` or a comma list."""
    try:
        if ":" in text:
            bits = [int(b) for b in text.split(":")]
            if len(bits) not in (2, 3):
                raise ValueError
            step = bits[2] if len(bits) == 3 else 1
            ranks = list(range(bits[0], bits[1] + 1, step))
        else:
            ranks = [int(b) for b in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rank range {text!r}") from None
    if not ranks or min(ranks) < 1:
        raise argparse.ArgumentTypeError(f"bad rank range {text!r}")
    return ranks


def _fmt(x) -> str:
    return repr(float(x))


def _read_matrix(path):
    try:
        return io.read_matrix(path)
    except (OSError, ShapeError) as exc:
        raise InputError(str(exc)) from None


def _write(fn, path, *args):
    try:
        fn(path, *args)
    except OSError as exc:
        raise InputError(str(exc)) from None


def _write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) if isinstance(v, int) else _fmt(v) for v in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(str(exc)) from None


def _suffixed(path, tag):
    stem, ext = os.path.splitext(path)
    return f"{stem}.{tag}{ext}"


def cmd_gen(args):
    family = "fast-decay" if args.family == "fastdecay" else args.family
    if family == "noisy-lowrank":
        a = gen_noisy_lowrank(args.n, args.k, args.gap, args.seed)
        _write(io.write_matrix, args.out, a)
    elif family == "fast-decay":
        a = gen_fast_decay(args.n, args.k, args.seed)
        _write(io.write_matrix, args.out, a)
    else:
        m, low, sparse = gen_rpca_instance(args.n, args.k, args.s, args.amp, args.seed)
        _write(io.write_matrix, args.out, m)
        _write(io.write_matrix, _suffixed(args.out, "L"), low)
        _write(io.write_matrix, _suffixed(args.out, "S"), sparse)
    return EXIT_OK


def _need_rank(args):
    if args.rank is None:
        raise ParameterError(f"--rank is required for method {args.method}")
    return args.rank


def cmd_singvals(args):
    a = _read_matrix(args.input)
    if args.method == "svd":
        est = svd(a).sigma
    elif args.method == "qrcp":
        est = np.abs(np.diag(qrcp(a if a.shape[0] >= a.shape[1] else a.T).r))
    elif args.method == "corutv":
        est = singular_estimates(corutv(a, _need_rank(args), args.power, args.variant, args.seed))
    else:
        est = tsr_svd(a, _need_rank(args), args.seed).sigma
    _write_csv(args.out, ("index", "estimate"), [(j + 1, e) for j, e in enumerate(est)])
    return EXIT_OK


def _approx(a, method, k, ell, power, seed, variant="exact"):
    """Rank-``k`` approximation; sketching methods use ``ell`` samples
    (``ell = k`` gives the full rank-``ell`` factorization)."""
    ell = k if ell is None else ell
    if method == "svd":
        return svd_rank_k(a, k)
    if method == "qrcp":
        return qrcp_rank_k(a, k) if a.shape[0] >= a.shape[1] else qrcp_rank_k(a.T, k).T
    if method == "corutv":
        return truncate_rank_k(corutv(a, ell, power, variant, seed), k)
    if method == "tsrsvd":
        return tsr_svd_rank_k(a, k, ell, seed)
    return sor_svd(a, k, ell, power, seed)


def _error(diff, kind):
    return float(np.linalg.norm(diff, 2 if kind == "spec" else "fro"))


def cmd_lowrank_error(args):
    a = _read_matrix(args.input)
    rows = []
    for k in args.ranks:
        ell = None if args.oversample is None else k + args.oversample
        errs = []
        for trial in range(args.trials):
            seed = args.seed.substream(trial)
            errs.append(_error(a - _approx(a, args.method, k, ell, args.power, seed, args.variant), args.norm))
        rows.append((k, float(np.mean(errs)), min(errs), max(errs)))
    _write_csv(args.out, ("rank", "mean", "min", "max"), rows)
    return EXIT_OK


def cmd_rpca(args):
    if args.stack:
        try:
            m = io.read_pgm_stack(io.expand_stack(args.stack))
        except (OSError, ShapeError) as exc:
            raise InputError(str(exc)) from None
    elif args.input:
        m = _read_matrix(args.input)
    else:
        raise ParameterError("one of --in or --stack is required")
    config = RpcaConfig(lam=args.lam, tol=args.tol, max_iter=args.max_iter, inner=args.inner,
                        rank_hint=args.rank_hint, ell=args.ell, q=args.power)
    start = time.perf_counter()
    res = alm_rpca(m, config, args.seed)
    wall = time.perf_counter() - start
    ext = "." + args.format
    _write(io.write_matrix, args.out_prefix + ".L" + ext, res.l)
    _write(io.write_matrix, args.out_prefix + ".S" + ext, res.s)
    report = {
        "inner": args.inner,
        "iterations": res.iterations,
        "converged": res.converged,
        "rank_l": res.rank_l,
        "s_l0": res.s_l0,
        "zeta": [float(z) for z in res.residuals],
    }
    if args.timing:
        report["wall_time_s"] = wall
    try:
        with open(args.out_prefix + ".report.txt", "w", newline="\n") as fh:
            fh.write(json.dumps(report, indent=1) + "\n")
    except OSError as exc:
        raise InputError(str(exc)) from None
    # wall time stays out of the report unless asked for, keeping outputs byte-stable
    sys.stderr.write(f"rpca: {res.iterations} iterations, rank {res.rank_l}, wall time {wall:.3f} s\n")
    if not res.converged:
        log.warning("rpca did not converge in %d iterations", res.iterations)
    return EXIT_OK


def cmd_image_approx(args):
    try:
        a = io.read_pgm(args.input)
    except (OSError, ShapeError) as exc:
        raise InputError(str(exc)) from None
    recon = _approx(a, args.method, args.rank, args.ell, args.power, args.seed)
    err = float(np.linalg.norm(a - recon))
    _write(io.write_pgm, args.out, recon)
    if args.report:
        _write_csv(args.report, ("rank", "error"), [(args.rank, err)])
    return EXIT_OK


def cmd_flops(args):
    model = flop_estimate(args.m, args.n, args.l, args.power, args.variant)
    sys.stdout.write(f"flops {_fmt(model.total)}\npasses {model.passes}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corutv", description="Randomized UTV low-rank tools.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=parse_seed, default=RngSeed(), help="SEED or SEED:STREAM")

    g = sub.add_parser("gen", help="write a synthetic test matrix")
    g.add_argument("--family", required=True, choices=("noisy-lowrank", "fast-decay", "fastdecay", "rpca"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True, help="rank k (rank r for rpca)")
    g.add_argument("--gap", type=float, default=0.01)
    g.add_argument("--s", type=int, default=0, help="number of sparse corruptions")
    g.add_argument("--amp", type=float, default=80.0)
    g.add_argument("--out", required=True)
    seeded(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("singvals", help="singular value estimates as CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--method", choices=("svd", "qrcp", "corutv", "tsrsvd"), default="svd")
    s.add_argument("--rank", type=int, help="sample size ell for corutv/tsrsvd")
    s.add_argument("--power", type=int, default=0)
    s.add_argument("--variant", choices=("exact", "approx"), default="exact")
    s.add_argument("--out", default="-")
    seeded(s)
    s.set_defaults(func=cmd_singvals)

    e = sub.add_parser("lowrank-error", help="approximation error against rank")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--method", choices=("svd", "qrcp", "corutv", "tsrsvd", "sorsvd"), default="corutv")
    e.add_argument("--ranks", type=parse_ranks, required=True, help="a:b inclusive, a:b:step or a,b,c")
    e.add_argument("--oversample", type=int, help="sample size ell = rank + oversample (default ell = rank)")
    e.add_argument("--power", type=int, default=0)
    e.add_argument("--variant", choices=("exact", "approx"), default="exact")
    e.add_argument("--trials", type=int, default=20)
    e.add_argument("--norm", choices=("fro", "spec"), default="fro")
    e.add_argument("--out", default="-")
    seeded(e)
    e.set_defaults(func=cmd_lowrank_error)

    r = sub.add_parser("rpca", help="low-rank plus sparse decomposition")
    r.add_argument("--in", dest="input")
    r.add_argument("--stack", help="directory of PGM frames or comma list, stacked column-wise")
    r.add_argument("--inner", choices=INNER, default="svt")
    r.add_argument("--lambda", dest="lam", type=float)
    r.add_argument("--tol", type=float, default=1e-5)
    r.add_argument("--max-iter", type=int, default=500)
    r.add_argument("--rank-hint", type=int, help="sample size 2*hint for corutv inners")
    r.add_argument("--ell", type=int, help="fixed sample size for corutv inners")
    r.add_argument("--power", type=int, default=1)
    r.add_argument("--format", choices=("bin", "csv"), default="bin")
    r.add_argument("--timing", action="store_true", help="include wall time in the report")
    r.add_argument("--out-prefix", required=True)
    seeded(r)
    r.set_defaults(func=cmd_rpca)

    i = sub.add_parser("image-approx", help="rank-k reconstruction of a PGM image")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--rank", type=int, required=True)
    i.add_argument("--method", choices=("svd", "qrcp", "corutv"), default="corutv")
    i.add_argument("--ell", type=int, help="corutv sample size (default: rank)")
    i.add_argument("--power", type=int, default=0)
    i.add_argument("--out", required=True)
    i.add_argument("--report")
    seeded(i)
    i.set_defaults(func=cmd_image_approx)

    f = sub.add_parser("flops", help="operation count of one CoR-UTV run")
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--l", type=int, required=True)
    f.add_argument("--power", type=int, default=0)
    f.add_argument("--variant", choices=("exact", "approx"), default="exact")
    f.set_defaults(func=cmd_flops)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (ParameterError, ShapeError, np.linalg.LinAlgError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
