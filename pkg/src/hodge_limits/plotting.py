"""Figures written next to the CSV curves (Agg backend, files only)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamps in PNG metadata, so identical data gives identical files
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def plot_growth(curves, path):
    """curves: [(label, xs, values, slope)] on log-log axes."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, xs, values, slope in curves:
        ax.loglog(xs, values, marker=".", label="%s  slope %.3f" % (label, slope))
    ax.set_xlabel("|Re z|")
    ax.set_ylabel("squared Hodge norm")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_decay(curves, path):
    """curves: [(label, us, values, slope)]; identically zero curves are skipped."""
    fig, ax = plt.subplots(figsize=(6, 4))
    drawn = 0
    for label, us, values, slope in curves:
        vals = np.asarray(values, dtype=float)
        if not np.any(vals > 0):
            continue
        ax.loglog(us, vals, marker=".", label="%s  slope %.2f" % (label, slope))
        drawn += 1
    if not drawn:
        ax.text(0.5, 0.5, "all pairings identically zero", ha="center", va="center", transform=ax.transAxes)
    else:
        ax.legend(fontsize=7)
    ax.set_xlabel("u")
    ax.set_ylabel("|<g(u)v, g(u)w>|")
    _save(fig, path)


def plot_higgs(xs, values, bounds, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(xs, values, "o", ms=3, label="Higgs norm")
    ax.loglog(xs, bounds, "-", label="bound C0^2 / x^2")
    ax.set_xlabel("|Re z|")
    ax.legend()
    _save(fig, path)


_VERDICT_CODE = {"In-D": 1, "NotPolarized": 0, "DecompositionFails": -1, "Indeterminate": -2}


def plot_orbit_scan(rows, path):
    """rows: [(x, y, verdict, residual)] as a labelled scatter."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for verdict, marker in (("In-D", "o"), ("NotPolarized", "x"), ("DecompositionFails", "s"),
                            ("Indeterminate", "?")):
        pts = [(x, y) for x, y, v, _ in rows if v == verdict]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, marker="$?$" if marker == "?" else marker, label=verdict)
    ax.set_xscale("symlog")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.legend(fontsize=7)
    _save(fig, path)


def plot_commutator(ratios, path):
    """ratios: {r: (lhs/mid list, mid/rhs list)} as box plots per dimension."""
    dims = sorted(ratios)
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    axes[0].boxplot([ratios[r][0] for r in dims], tick_labels=[str(r) for r in dims])
    axes[0].set_title("||[A*,A]||^2 / 2||A||^4")
    axes[1].boxplot([ratios[r][1] for r in dims], tick_labels=[str(r) for r in dims])
    axes[1].set_title("2||A||^4 / (binom(r+1,3) ||[A*,A]||^2)")
    for ax in axes:
        ax.axhline(1.0, color="k", lw=0.8)
        ax.set_xlabel("r")
    _save(fig, path)


def plot_hodge_diamond(dims, path, title="Deligne bigrading"):
    """dims: {(p, q): dimension}, drawn as labelled points in the (p, q) plane."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    if dims:
        for (p, q), d in dims.items():
            ax.scatter([p], [q], s=150 + 80 * d, color="tab:blue", alpha=0.6)
            ax.annotate(str(d), (p, q), ha="center", va="center", color="white", fontsize=9)
        ps = [p for p, _ in dims]
        qs = [q for _, q in dims]
        lo, hi = min(ps + qs) - 1, max(ps + qs) + 1
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_xticks(range(lo, hi + 1))
        ax.set_yticks(range(lo, hi + 1))
    ax.set_aspect("equal")
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
