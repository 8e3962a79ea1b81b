"""PNG figures for the CLI reports (matplotlib, Agg backend).

Figures are a convenience next to the CSV tables; every plotted number is
also in a table.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (np.sqrt(5) - 1.0) / 2.0
STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "figure.dpi": 100,
}


def _figure(width=5.0):
    plt.rcParams.update(STYLE)
    return plt.subplots(figsize=(width, width * GOLDEN))


def _floor(values, tiny=1e-300):
    return np.maximum(np.asarray(values, dtype=float), tiny)


def _gammas(ax, data):
    if len(data):
        ax.semilogy(np.arange(len(data)), _floor(data), "o-")
    ax.set_xlabel("k")
    ax.set_ylabel(r"$|\gamma_k|$")


def _boundary(ax, data):
    m = len(data)
    ax.plot(2 * np.pi * np.arange(m) / m, data)
    ax.set_xlabel("angle")
    ax.set_ylabel(r"$|h|$ on the circle")


def _traces(ax, data):
    for i, tr in enumerate(data):
        ax.semilogy(np.arange(len(tr)), _floor(tr), "o-", label=f"mu {i}")
    ax.set_xlabel("n")
    ax.set_ylabel("squared distance")
    if data:
        ax.legend()


def _spectrum(ax, data):
    sizes = np.arange(1, len(data) + 1)
    if len(data):
        lo, hi = np.array(data).T
        ax.plot(sizes, lo, "o-", label=r"$\lambda_{min}$")
        ax.plot(sizes, hi, "s-", label=r"$\lambda_{max}$")
        ax.legend()
    ax.set_xlabel("truncation size")
    ax.set_ylabel("Gram eigenvalue")


def _sigma(ax, data):
    for name, sv in sorted(data.items()):
        ax.semilogy(np.arange(1, len(sv) + 1), _floor(sv), "o-", label=name)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\sigma_k$")
    if data:
        ax.legend()


_KINDS = {"gammas": _gammas, "boundary": _boundary, "traces": _traces,
          "spectrum": _spectrum, "sigma": _sigma}


def render(kind: str, data, path: str):
    """Draw a figure of ``kind`` from ``data`` and save it to ``path``."""
    fig, ax = _figure()
    try:
        _KINDS[kind](ax, data)
        fig.tight_layout()
        # no Software tag, so identical data gives identical bytes
        fig.savefig(path, metadata={"Software": None})
    finally:
        plt.close(fig)
