"""Matplotlib renderings of the CLI sweeps.

Figures are written with a fixed SVG hash salt and no date metadata so the
same data always produces the same bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "svg.hashsalt": "fapchan",
    "svg.fonttype": "path",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_DRIFT_COLORS = ["tab:red", "tab:blue", "tab:green", "tab:orange", "tab:purple", "tab:brown"]


def _figure(width=5.0):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    return plt.subplots(figsize=(width, width * golden))


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower() if "." in str(path) else "svg"
    metadata = {"Date": None} if fmt == "svg" else None
    fig.tight_layout()
    fig.savefig(path, format=fmt, metadata=metadata)
    plt.close(fig)


def capacity_figure(rows, path):
    """MI with uniform input (solid), AWGN approximation (dashed), zero-drift Cauchy capacity (dotted)."""
    v = np.array([r.v for r in rows])
    with plt.rc_context(_STYLE):
        fig, ax = _figure()
        ax.semilogx(v, [r.mi_exact_nats for r in rows], "r-", label="Exact $I(X;Y)$, uniform input")
        ax.semilogx(v, [r.c_gauss_nats for r in rows], "b--", label="Gaussian approximation")
        ax.semilogx(v, [r.c_cauchy_nats for r in rows], "k:", label=r"Zero-drift Cauchy limit $\ln(A/\lambda)$")
        ax.set_xlabel(r"drift velocity $v$ [$\mu$m/s]")
        ax.set_ylabel("capacity [nats]")
        ax.set_ylim(bottom=0)
        ax.legend(loc="lower right")
        _save(fig, path)


def interference_figure(rows, path, sigma2):
    """Log-log P(|N| > r); the zero-drift row set is dotted black, drifted sets mark n_c."""
    drifts = sorted({r.v for r in rows})
    with plt.rc_context(_STYLE):
        fig, ax = _figure()
        r_hi = max(r.r for r in rows)
        colors = iter(_DRIFT_COLORS)
        for v in drifts:
            sel = [p for p in rows if p.v == v and p.r > 0 and p.p_int > 0]
            r = [p.r for p in sel]
            p = [p.p_int for p in sel]
            if v == 0:
                ax.loglog(r, p, "k:", label="zero drift (Cauchy)")
                continue
            color = next(colors)
            ax.loglog(r, p, "-" if v < 1 else "--", color=color, label=f"v = {v:g}")
            n_c = sigma2 / v
            if n_c <= r_hi:
                ax.axvline(n_c, color=color, lw=0.8, alpha=0.7)
                ax.annotate(f"$n_c$={n_c:g}", (n_c, ax.get_ylim()[0]), color=color,
                            fontsize=7, rotation=90, va="bottom", ha="right")
        ax.set_xlabel(r"separation $r$ [$\mu$m]")
        ax.set_ylabel(r"$P(|N| > r)$")
        ax.legend(loc="lower left")
        _save(fig, path)


def pdf_figure(n, pdf, label, path):
    with plt.rc_context(_STYLE):
        fig, ax = _figure()
        ax.semilogy(n, pdf, "k-", label=label)
        ax.set_xlabel(r"lateral offset $n$ [$\mu$m]")
        ax.set_ylabel(r"$f_N(n)$")
        ax.legend()
        _save(fig, path)


def histogram_figure(edges, density, curves, path):
    """Empirical density as steps against named analytic curves evaluated at bin centres."""
    centres = 0.5 * (edges[:-1] + edges[1:])
    with plt.rc_context(_STYLE):
        fig, ax = _figure()
        ax.stairs(density, edges, color="0.5", label="Monte-Carlo")
        styles = iter(["r-", "b--", "k:"])
        for name, values in curves.items():
            ax.plot(centres, values, next(styles), label=name)
        ax.set_yscale("log")
        ax.set_xlabel(r"lateral offset $n$ [$\mu$m]")
        ax.set_ylabel("density")
        ax.legend()
        _save(fig, path)
