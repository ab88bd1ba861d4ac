"""Command-line entry point: ``fapchan <command> [flags]``.

Exit codes: 0 success, 2 bad arguments, 3 numerical non-convergence,
4 Monte-Carlo validation failure.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import infotheory, kernels, montecarlo
from .errors import DomainError, FapchanError, QuadratureError, UnnormalizedError, ValidationFailure
from .infotheory import CapacityConfig
from .kernels import ChannelParams, Kernel
from .quadrature import QuadConfig, build_cdf

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

DEFAULTS = {
    "lambda": 10.0,
    "sigma2": 200.0,
    "amplitude": 200.0,
    "kernel": "auto",
    "seed": 0,
}
ENV_PREFIX = "FAPCHAN_"
KERNEL_CHOICES = ("auto", "eq2", "subordination", "cauchy")
VALIDATION_KS_THRESHOLD = 0.01


class UsageError(FapchanError):
    pass


def fmt(x):
    """17 significant digits, lowercase scientific, locale-independent."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def short(x):
    x = float(x)
    return "inf" if math.isinf(x) else f"{x:.12g}"


def _from_env(name, convert):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None:
        return None
    try:
        return convert(raw)
    except ValueError:
        raise UsageError(f"environment variable {ENV_PREFIX}{name.upper()}={raw!r} is not valid") from None


def _resolve(args, name, convert):
    value = getattr(args, name, None)
    if value is not None:
        return value
    env = _from_env(name, convert)
    return DEFAULTS[name] if env is None else env


def _kernel_name(raw):
    if raw not in KERNEL_CHOICES:
        raise ValueError(raw)
    return raw


def _common_flags():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("channel and numerics")
    g.add_argument("--lambda", dest="lambda_", type=float, metavar="LAMBDA",
                   help="transmission distance in um (env FAPCHAN_LAMBDA, default 10)")
    diff = g.add_mutually_exclusive_group()
    diff.add_argument("--sigma2", type=float, help="diffusion scale sigma^2 = 2D in um^2/s (env FAPCHAN_SIGMA2, default 200)")
    diff.add_argument("--diffusion", type=float, metavar="D", help="diffusion coefficient D in um^2/s; sets sigma^2 = 2D")
    g.add_argument("--drift", type=float, default=None, help="drift speed v in um/s toward the receiver")
    g.add_argument("--amplitude", type=float, help="peak input amplitude A in um (env FAPCHAN_AMPLITUDE, default 200)")
    g.add_argument("--kernel", choices=KERNEL_CHOICES,
                   help="noise kernel; auto = subordination for v > 0, cauchy for v = 0 (env FAPCHAN_KERNEL)")
    g.add_argument("--abs-tol", type=float, default=1e-10, help="quadrature absolute tolerance")
    g.add_argument("--rel-tol", type=float, default=1e-8, help="quadrature relative tolerance")
    g.add_argument("--out", help="write the CSV table to this path instead of stdout")
    g.add_argument("--svg", help="render a figure to this path (SVG unless the suffix says otherwise)")
    g.add_argument("--seed", type=int, help="Monte-Carlo seed (env FAPCHAN_SEED, default 0)")
    g.add_argument("--samples", type=int, default=10**6, help="Monte-Carlo sample count")
    return p


def build_parser():
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="fapchan", description="Drift-diffusion first-arrival-position channel toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", parents=[common], help="tabulate a noise density")
    p.add_argument("--n-min", type=float, default=-200.0)
    p.add_argument("--n-max", type=float, default=200.0)
    p.add_argument("--points", type=int, default=401)

    p = sub.add_parser("capacity", parents=[common], help="mutual information and capacity baselines versus drift")
    p.add_argument("--v-min", type=float, default=1e-3)
    p.add_argument("--v-max", type=float, default=20.0)
    p.add_argument("--v-points", type=int, default=40)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("interference", parents=[common], help="interference probability versus separation")
    p.add_argument("--r-min", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=1000.0)
    p.add_argument("--r-points", type=int, default=60)
    p.add_argument("--v-list", default="0.1,5", help="comma-separated drifts; 0 adds the Cauchy baseline")
    p.add_argument("--no-zero-drift", action="store_true", help="omit the zero-drift baseline rows")

    p = sub.add_parser("validate-mc", parents=[common], help="Monte-Carlo validation of the kernels")
    p.add_argument("--bins", type=int, default=200)

    p = sub.add_parser("regime", parents=[common], help="critical scale and regime of one offset")
    p.add_argument("--n", type=float, default=0.0, help="lateral offset")

    sub.add_parser("shaping-loss", parents=[common], help="uniform-input shaping loss against the Cauchy capacity")
    return parser


class Context:
    """Resolved flags shared by all commands."""

    def __init__(self, args):
        self.args = args
        if args.lambda_ is not None:
            self.lam = args.lambda_
        else:
            env = _from_env("lambda", float)
            self.lam = DEFAULTS["lambda"] if env is None else env
        if args.diffusion is not None:
            self.sigma2 = 2.0 * args.diffusion
        elif args.sigma2 is not None:
            self.sigma2 = args.sigma2
        else:
            env = _from_env("sigma2", float)
            self.sigma2 = DEFAULTS["sigma2"] if env is None else env
        self.amplitude = _resolve(args, "amplitude", float)
        self.kernel_name = _resolve(args, "kernel", _kernel_name)
        self.seed = _resolve(args, "seed", int)
        self.drift = 0.0 if args.drift is None else args.drift
        self.cfg = QuadConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)

    def params(self, v=None):
        return ChannelParams(self.lam, self.sigma2, self.drift if v is None else v)

    def kernel(self, v=None):
        v = self.drift if v is None else v
        if self.kernel_name == "auto":
            return Kernel.SUBORDINATION if v > 0 else Kernel.CAUCHY_LIMIT
        return Kernel(self.kernel_name)


def _emit_csv(ctx, header, rows):
    path = ctx.args.out
    stream = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
    finally:
        if path:
            stream.close()


def _warn_unnormalized(kernel, mass):
    print(f"warning: kernel {kernel.value!r} integrates to {mass:.9g}, not 1; values are formal", file=sys.stderr)


def cmd_pdf(ctx):
    a = ctx.args
    if a.points < 2 or not a.n_min < a.n_max:
        raise UsageError("need --points >= 2 and --n-min < --n-max")
    params, kernel = ctx.params(), ctx.kernel()
    n = np.linspace(a.n_min, a.n_max, a.points)
    lp = kernels.log_pdf(params, kernel, n)
    rows = []
    for ni, li in zip(n, lp):
        if params.v > 0:
            regime = kernels.classify_regime(params, ni)
            z, label = regime.z, str(regime.label)
        else:
            z, label = 0.0, str(kernels.RegimeLabel.CAUCHY_CORE)
        rows.append((ni, math.exp(li), li, z, label))
    _emit_csv(ctx, ["n", "pdf", "log_pdf", "z", "regime"], rows)
    if a.svg:
        from .plotting import pdf_figure

        pdf_figure(n, np.exp(lp), f"{kernel.value}, v = {params.v:g}", a.svg)


def cmd_capacity(ctx):
    a = ctx.args
    if not 0 < a.v_min < a.v_max or a.v_points < 2:
        raise UsageError("need 0 < --v-min < --v-max and --v-points >= 2")
    grid = np.geomspace(a.v_min, a.v_max, a.v_points)
    kernel = ctx.kernel(grid[0])
    if kernel is Kernel.CAUCHY_LIMIT:
        raise UsageError("the capacity sweep needs a drifted kernel (eq2 or subordination)")
    allow = not kernel.is_normalized
    if allow:
        _warn_unnormalized(kernel, infotheory.kernel_mass(ctx.params(grid[0]), kernel, ctx.cfg))
    cap = CapacityConfig(ctx.amplitude)
    rows = infotheory.capacity_sweep(ctx.lam, ctx.sigma2, kernel, cap, grid, ctx.cfg,
                                     workers=a.workers, allow_unnormalized=allow)
    _emit_csv(ctx, ["v", "mi_exact_nats", "c_gauss_nats", "c_cauchy_nats", "noise_variance", "n_c"],
              [(r.v, r.mi_exact_nats, r.c_gauss_nats, r.c_cauchy_nats, r.noise_variance, r.n_c) for r in rows])
    if a.svg:
        from .plotting import capacity_figure

        capacity_figure(rows, a.svg)


def _parse_list(raw):
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"could not parse drift list {raw!r}") from None


def cmd_interference(ctx):
    a = ctx.args
    if not 0 < a.r_min < a.r_max or a.r_points < 2:
        raise UsageError("need 0 < --r-min < --r-max and --r-points >= 2")
    drifts = _parse_list(a.v_list)
    r_grid = np.geomspace(a.r_min, a.r_max, a.r_points)
    drifted = [v for v in drifts if v > 0]
    kernel = ctx.kernel(drifted[0]) if drifted else Kernel.CAUCHY_LIMIT
    if drifted and kernel is Kernel.CAUCHY_LIMIT:
        raise UsageError("drifted rows need a drifted kernel (eq2 or subordination)")
    if drifted and not kernel.is_normalized:
        _warn_unnormalized(kernel, infotheory.kernel_mass(ctx.params(drifted[0]), kernel, ctx.cfg))
    rows = infotheory.interference_sweep(ctx.lam, ctx.sigma2, kernel, r_grid, drifts, ctx.cfg,
                                         include_zero_drift=not a.no_zero_drift)
    _emit_csv(ctx, ["v", "r", "p_int"], [(p.v, p.r, p.p_int) for p in rows])
    if a.svg:
        from .plotting import interference_figure

        interference_figure(rows, a.svg, ctx.sigma2)


def _tail_fit(samples, params):
    """Exponential rate from |N| counts on [2 n_c, 6 n_c], algebraic prefactor n^(-3/2) held fixed."""
    lo, hi = 2.0 * params.n_c, 6.0 * params.n_c
    edges = np.linspace(lo, hi, 21)
    counts, _ = np.histogram(np.abs(samples), edges)
    keep = counts >= 5
    if keep.sum() < 3:
        return None
    centres = 0.5 * (edges[:-1] + edges[1:])[keep]
    return kernels.fit_tail_rate(centres, np.log(counts[keep]), 1.5, weights=np.sqrt(counts[keep]))


def validation_report(ctx):
    """Run the Monte-Carlo validation; returns (report lines, histogram rows, header, best KS, figure data)."""
    a = ctx.args
    if a.samples < 10**4:
        raise UsageError("validate-mc needs --samples >= 10000")
    if a.bins < 2:
        raise UsageError("need --bins >= 2")
    params = ctx.params()
    cfg = montecarlo.McConfig(samples=a.samples, seed=ctx.seed)
    x = montecarlo.draw_fap(params, cfg)
    lines = [
        "fapchan Monte-Carlo validation",
        f"lambda={short(params.lam)} sigma2={short(params.sigma2)} v={short(params.v)} "
        f"n_c={short(params.n_c)} samples={cfg.samples} seed={cfg.seed}",
    ]
    candidates = [Kernel.SUBORDINATION, Kernel.EXACT_EQ2] if params.v > 0 else [Kernel.CAUCHY_LIMIT]
    lines.append("normalization integrals:")
    tables = {}
    for k in candidates:
        cdf = build_cdf(params, k, ctx.cfg)
        tables[k] = cdf
        lines.append(f"  {k.value:<14} {cdf.total_mass:.9f}")
    lines.append("KS distance against each kernel CDF:")
    ks = {}
    for k, cdf in tables.items():
        ks[k] = montecarlo.ks_statistic(x, cdf, renormalize=not cdf.is_normalized)
        note = " (after explicit renormalization)" if not cdf.is_normalized else ""
        lines.append(f"  {k.value:<14} {ks[k]:.6f}{note}")
    best = min(ks, key=ks.get)
    lines.append(f"best-matching kernel: {best.value}")

    stats = None
    half = 50.0 * params.lam if params.v == 0 else min(10.0 * params.n_c, 50.0 * params.lam)
    edges = np.linspace(-half, half, a.bins + 1)
    stats = montecarlo.summarize(x, edges, [params.lam] + ([params.n_c] if params.v > 0 else []))
    if params.v > 0:
        analytic = params.sigma2 * params.lam / params.v
        lines.append(f"variance: empirical={stats.variance:.6g} analytic sigma2*lambda/v={analytic:.6g} "
                     f"relative error={stats.variance / analytic - 1:+.4%}")
        rate = _tail_fit(x, params)
        sub_rate = kernels.tail_decay_rate(params, Kernel.SUBORDINATION)
        eq2_rate = kernels.tail_decay_rate(params, Kernel.EXACT_EQ2)
        if rate is None:
            lines.append("tail rate fit: too few samples in [2 n_c, 6 n_c]")
        else:
            lines.append(f"tail rate fit on [2 n_c, 6 n_c]: {rate:.6g} (subordination v/sigma2={sub_rate:.6g}, "
                         f"eq2 2v/sigma2={eq2_rate:.6g})")
    else:
        q1, med, q3 = stats.quartiles
        lines.append("variance: undefined for zero drift; "
                     f"empirical variance={stats.variance:.6g} (heavy-tail witness)")
        lines.append(f"median |N|={stats.median_abs:.6g} (Cauchy: lambda={short(params.lam)}) "
                     f"quartiles=({q1:.6g}, {med:.6g}, {q3:.6g})")
    for r, e in zip(stats.radii, stats.exceedances):
        lines.append(f"P(|N| > {short(r)}): empirical={e / stats.count:.6g}")
    passed = ks[best] < VALIDATION_KS_THRESHOLD
    lines.append(f"verdict: {'PASS' if passed else 'FAIL'} (best KS {ks[best]:.6f} vs threshold {VALIDATION_KS_THRESHOLD})")

    width = np.diff(edges)
    density = stats.counts / (stats.count * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    curves = {f"{k.value}_pdf": kernels.pdf(params, k, centres) for k in candidates}
    header = ["bin_lo", "bin_hi", "count", "empirical_density"] + list(curves)
    rows = [
        (edges[i], edges[i + 1], str(int(stats.counts[i])), density[i], *(c[i] for c in curves.values()))
        for i in range(a.bins)
    ]
    return lines, header, rows, passed, (edges, density, curves)


def cmd_validate_mc(ctx):
    lines, header, rows, passed, fig = validation_report(ctx)
    print("\n".join(lines))
    if ctx.args.out:
        _emit_csv(ctx, header, rows)
    if ctx.args.svg:
        from .plotting import histogram_figure

        histogram_figure(*fig, ctx.args.svg)
    if not passed:
        raise ValidationFailure("Monte-Carlo samples do not match any kernel")


def cmd_regime(ctx):
    params = ctx.params()
    if params.v == 0:
        print("n_c=inf regime=CauchyCore(everywhere)")
        return
    regime = kernels.classify_regime(params, ctx.args.n)
    print(f"n_c={short(params.n_c)} z={short(regime.z)} regime={regime.label}")


def cmd_shaping_loss(ctx):
    params = ctx.params()
    kernel = ctx.kernel()
    cap = CapacityConfig(ctx.amplitude)
    lo, hi = infotheory.uniform_mi_bracket(cap, params.lam)
    if kernel is Kernel.CAUCHY_LIMIT:
        params = params.with_drift(0.0)
    mi = infotheory.mutual_information_uniform(params, kernel, cap, ctx.cfg)
    loss = infotheory.shaping_loss(cap, params.lam, mi)
    print(f"kernel={kernel.value} v={short(params.v)} A={short(cap.amplitude)} lambda={short(params.lam)}")
    print(f"asymptotic shaping loss ln(2*pi) = {loss.asymptotic:.4f} nats")
    print(f"numeric shaping loss ln(A/lambda) - I_unif = {loss.numeric:.4f} nats (I_unif = {mi:.4f} nats)")
    print(f"uniform-input bracket [ln(A/(2*pi*lambda)), ln(A/lambda)] = [{lo:.4f}, {hi:.4f}] nats")
    if ctx.args.out:
        _emit_csv(ctx, ["asymptotic_nats", "numeric_nats", "mi_uniform_nats", "bracket_lo_nats", "bracket_hi_nats"],
                  [(loss.asymptotic, loss.numeric, mi, lo, hi)])


COMMANDS = {
    "pdf": cmd_pdf,
    "capacity": cmd_capacity,
    "interference": cmd_interference,
    "validate-mc": cmd_validate_mc,
    "regime": cmd_regime,
    "shaping-loss": cmd_shaping_loss,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = Context(args)
        COMMANDS[args.command](ctx)
    except ValidationFailure as exc:
        print(f"fapchan: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QuadratureError as exc:
        print(f"fapchan: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, DomainError, UnnormalizedError) as exc:
        print(f"fapchan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
