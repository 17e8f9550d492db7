"""Command line entry point: ``gaborcs <subcommand> [flags]``.

Exit status is 0 on success, 1 for usage or domain errors and 2 for I/O
errors. Commands given ``--out`` also write ``<out>.manifest.json``.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .bounds import thm22_constants
from .bp import BPConfig, basis_pursuit, dual_certificate, relative_error
from .exceptions import GaborCSError
from .gram import coherence, extremal_eigenvalues, gram_submatrix, random_support
from .harness import (CONDITIONING_FIELDS, PHASE_FIELDS, TRIAL_FIELDS, ChannelOperator,
                      ExperimentSpec, draw_coefficients, format_value, identify_channel,
                      make_window, run_conditioning, run_phase_transition, run_random_phase,
                      tabulate_bounds, write_manifest, write_rows)
from .montecarlo import derive_seed, trial_rng
from .tfcore import GaborOperator, SupportSet


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _shared(p, trials=None):
    p.add_argument("--n", type=int, required=True, help="signal dimension")
    p.add_argument("--window", choices=("alltop", "steinhaus"), default="steinhaus")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float, default=1e-5, help="relative recovery tolerance")
    p.add_argument("--threads", type=int, default=None)
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials)


def _solver(args) -> BPConfig:
    return BPConfig(recovery_tol=args.tol, max_iterations=getattr(args, "max_iter", 20000))


def _parse_support(text, n):
    pairs = [p for p in text.split(";") if p.strip()]
    return SupportSet((tuple(int(v) for v in p.split(",")) for p in pairs), n)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaborcs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("window", help="print or save a window")
    _shared(p)

    p = sub.add_parser("coherence", help="coherence of the Gabor system")
    _shared(p)

    p = sub.add_parser("gram", help="extremal eigenvalues of a Gram submatrix")
    _shared(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--support", help="'k,l;k,l;...'")
    g.add_argument("--s", type=int, help="size of a random support")

    for name, help_ in (("recover", "recover one random sparse vector"),
                        ("identify", "identify a random sparse channel operator")):
        p = sub.add_parser(name, help=help_)
        _shared(p)
        p.add_argument("--s", type=int, required=True)
        p.add_argument("--magnitudes", choices=("unit", "gaussian"), default="unit")
        p.add_argument("--max-iter", dest="max_iter", type=int, default=20000)

    p = sub.add_parser("phase", help="phase transition sweep")
    _shared(p, trials=100)
    p.add_argument("--s-min", type=int, default=1)
    p.add_argument("--s-max", type=int, required=True)
    p.add_argument("--s-step", type=int, default=1)
    p.add_argument("--magnitudes", choices=("unit", "gaussian"), default="unit")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=20000)

    p = sub.add_parser("random-phase", help="random-phase trials with the closed-form bound")
    _shared(p, trials=100)
    p.add_argument("--s", type=int, nargs="+", required=True)
    p.add_argument("--sigma", type=float, default=9.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=20000)

    p = sub.add_parser("conditioning", help="Monte-Carlo conditioning failure rate")
    _shared(p, trials=500)
    p.add_argument("--s", type=int, nargs="+", required=True)
    p.add_argument("--delta", type=float, default=0.5)

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p.add_argument("--preset", choices=("remark22", "table"), default="table")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int, nargs="+", default=[1, 2, 4, 8])
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=9.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _emit(rows, args, fieldnames=None):
    if args.out:
        write_rows(rows, args.out, args.format, fieldnames)
    else:
        write_rows_stdout(rows, fieldnames)


def write_rows_stdout(rows, fieldnames=None):
    from .harness import _as_dicts
    dicts = _as_dicts(rows)
    if fieldnames is None:
        fieldnames = list(dicts[0]) if dicts else []
    print(",".join(fieldnames))
    for d in dicts:
        print(",".join(format_value(d.get(k)) for k in fieldnames))


def _cmd_window(args):
    w = make_window(args.window, args.n, args.seed)
    rows = [{"q": q, "re": v.real, "im": v.imag} for q, v in enumerate(w.values)]
    _emit(rows, args)
    return {"n": args.n, "window": args.window}


def _cmd_coherence(args):
    mu = coherence(GaborOperator(make_window(args.window, args.n, args.seed)))
    print(f"{mu:.10f}")
    if args.out:
        write_rows([{"n": args.n, "window": args.window, "coherence": mu}], args.out, args.format)
    return {"n": args.n, "window": args.window}


def _cmd_gram(args):
    op = GaborOperator(make_window(args.window, args.n, args.seed))
    if args.support:
        support = _parse_support(args.support, args.n)
    else:
        support = random_support(args.n, args.s, trial_rng(args.seed, 0, "support"))
    rep = extremal_eigenvalues(gram_submatrix(op, support))
    row = {"n": args.n, "S": len(support), "lambda_min": rep.lambda_min,
           "lambda_max": rep.lambda_max, "op_norm_H": rep.op_norm_H,
           "frobenius_H": rep.frobenius_H}
    _emit([row], args)
    return {"n": args.n, "support": [tuple(l) for l in support]}


def _cmd_recover(args):
    window_seed = derive_seed(args.seed, 0, "window")
    op = GaborOperator(make_window(args.window, args.n, window_seed))
    truth = draw_coefficients(args.n, args.s, trial_rng(args.seed, 0, "support"),
                              trial_rng(args.seed, 0, "phases"),
                              trial_rng(args.seed, 0, "magnitudes"), args.magnitudes)
    res = basis_pursuit(op, op.synthesize(truth), _solver(args))
    err = relative_error(truth, res)
    cert = (dual_certificate(op, truth.support, truth.signs()).max_offsupport_magnitude
            if truth.nnz else 0.0)
    row = {"n": args.n, "window": args.window, "S": truth.nnz, "success": err <= args.tol,
           "relative_error": err, "residual": res.residual, "iterations": res.iterations,
           "converged": res.converged, "certificate_max": cert}
    _emit([row], args)
    return {"n": args.n, "S": args.s, "window_seed": window_seed}


def _cmd_identify(args):
    truth = draw_coefficients(args.n, args.s, trial_rng(args.seed, 0, "support"),
                              trial_rng(args.seed, 0, "phases"),
                              trial_rng(args.seed, 0, "magnitudes"), args.magnitudes)
    probe_seed = derive_seed(args.seed, 0, "window")
    out = identify_channel(ChannelOperator(truth), args.window, probe_seed, _solver(args))
    err = relative_error(truth, out.dense)
    rows = [{"k": k, "l": l, "true_re": t.real, "true_im": t.imag,
             "est_re": out.dense[k * args.n + l].real, "est_im": out.dense[k * args.n + l].imag}
            for (k, l), t in zip(truth.support, truth.values)]
    _emit(rows, args)
    print(f"# relative_error={err:.6g} converged={out.converged} "
          f"recovered_support={len(out.coeffs.support)}", file=sys.stderr)
    return {"n": args.n, "S": args.s, "probe_seed": probe_seed}


def _cmd_phase(args):
    grid = tuple(range(args.s_min, args.s_max + 1, args.s_step))
    spec = ExperimentSpec("phase_transition", args.n, args.window, grid, args.trials, args.seed,
                          _solver(args), args.out, args.format, args.magnitudes)
    _emit(run_phase_transition(spec, args.threads), args, list(PHASE_FIELDS))
    return spec.params()


def _cmd_random_phase(args):
    spec = ExperimentSpec("random_phase", args.n, "steinhaus", tuple(args.s), args.trials,
                          args.seed, _solver(args), args.out, args.format, sigma=args.sigma)
    res = run_random_phase(spec, args.threads)
    _emit(res.records, args, list(TRIAL_FIELDS))
    for S, est in res.failure_rate.items():
        bound = res.thm21_bound.get(S)
        bound_txt = format_value(bound.value) if bound is not None else "n/a"
        print(f"# S={S} failure_rate={est.rate:.6g} wilson=[{est.wilson_lo:.4g},"
              f"{est.wilson_hi:.4g}] thm21_bound={bound_txt}", file=sys.stderr)
    return spec.params()


def _cmd_conditioning(args):
    spec = ExperimentSpec("conditioning", args.n, "steinhaus", tuple(args.s), args.trials,
                          args.seed, output_path=args.out, output_format=args.format,
                          delta=args.delta)
    _emit(run_conditioning(spec, args.threads), args, list(CONDITIONING_FIELDS))
    return spec.params()


def _cmd_bounds(args):
    if args.preset == "remark22":
        c1, c2, c3 = thm22_constants()
        row = {"C1": c1, "C2": c2, "C3": c3}
        if args.out:
            write_rows([row], args.out, args.format)
        print(f"C1={c1:.4f} C2={c2:.4f} C3={c3:.4f}")
        return row
    if args.n is None:
        raise GaborCSError("bounds --preset table needs --n")
    spec = ExperimentSpec("bounds_table", args.n, sparsity_grid=tuple(args.s), trials=1,
                          delta=args.delta, sigma=args.sigma, epsilon=args.epsilon, t=args.t)
    _emit(tabulate_bounds(spec), args)
    return spec.params()


_COMMANDS = {
    "window": _cmd_window,
    "coherence": _cmd_coherence,
    "gram": _cmd_gram,
    "recover": _cmd_recover,
    "identify": _cmd_identify,
    "phase": _cmd_phase,
    "random-phase": _cmd_random_phase,
    "conditioning": _cmd_conditioning,
    "bounds": _cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        params = _COMMANDS[args.command](args)
        if getattr(args, "out", None):
            write_manifest(args.out, args.command, params, getattr(args, "seed", None), started)
    except OSError as exc:
        print(f"gaborcs: I/O error: {exc}", file=sys.stderr)
        return 2
    except (GaborCSError, ValueError) as exc:
        print(f"gaborcs: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
