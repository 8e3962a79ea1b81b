"""Finite-section operator diagnostics.

Hankel sections of symbols theta * conj(B), Nehari lower bounds, singular
value profiles, Gram-spectrum (Riesz / AOS) diagnostics and the
two-sided cross-basis experiment for pairs of interpolating sequences.

None of these decide an asymptotic property.  They produce finite
evidence: monotone lower bounds, decay contrasts and tail constants.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .disc import DiscSequence, blaschke_product, pseudohyperbolic
from .errors import CarlesonTooSmall, IllConditioned, SectionTooLarge
from .kernels import KernelFamilySpec, gram_kernels, malmquist_walsh
from .oracle import CircleGrid, GridFn, MAX_CONDITION, blaschke_projected_gram, projected_mw_gram
from .schur import BlaschkeNode, SchurFn

MAX_DENSE = 512
CARLESON_MIN = 0.05


@dataclass(frozen=True, eq=False)
class HankelSection:
    """m x m leading section of H_phi: entries c_{-(j+k+1)} of the symbol."""

    m: int
    matrix: np.ndarray
    symbol: GridFn | None = None

    def singular_values(self) -> np.ndarray:
        return scipy.linalg.svdvals(self.matrix)


def hankel_section(phi: GridFn, m: int) -> HankelSection:
    n = phi.grid.n
    if m > n // 4:
        raise SectionTooLarge(f"section {m} exceeds N/4 = {n // 4} for a grid of {n}")
    c = phi.fourier  # index k + n//2
    neg = np.array([c[n // 2 - j] for j in range(1, 2 * m)])  # c_{-1}, ..., c_{-(2m-1)}
    return HankelSection(m, scipy.linalg.hankel(neg[:m], neg[m - 1:]), phi)


def hankel_section_rational(theta: SchurFn, seq: DiscSequence, m: int) -> HankelSection:
    """Exact section for phi = theta * conj(B_seq) by residues at the zeros of B.

    c_{-k} = sum_i theta(lam_i) lam_i^{k-1} / B'(lam_i), so the section is
    V diag(w) V^T with V[j, i] = lam_i^j.  Needs only point values of theta.
    """
    if m > MAX_DENSE:
        raise SectionTooLarge(f"section {m} exceeds the dense cap {MAX_DENSE}")
    pts = seq.array
    w = np.empty(len(pts), dtype=complex)
    for i, a in enumerate(pts):
        rest = blaschke_product(np.delete(pts, i), a)
        if a == 0:
            deriv = rest
        else:
            deriv = -(np.conj(a) / abs(a)) / ((1 - abs(a)) * (1 + abs(a))) * rest
        w[i] = complex(theta(a)) / deriv
    V = pts[None, :] ** np.arange(m)[:, None]
    return HankelSection(m, (V * w[None, :]) @ V.T)


def theta_conj_b_symbol(theta: SchurFn, seq: DiscSequence, grid: CircleGrid | None = None) -> GridFn:
    grid = grid or CircleGrid()
    th = grid.sample(theta)
    return GridFn(grid, th.values * np.conj(blaschke_product(seq.points, grid.nodes)))


def _sections(source, m):
    if isinstance(source, GridFn):
        return hankel_section(source, m)
    theta, seq = source
    return hankel_section_rational(theta, seq, m)


def nehari_lower_bound(phi, sizes, raw: bool = False):
    """Largest singular value of each section, as a nondecreasing list.

    ``phi`` is a GridFn or a ``(theta, seq)`` pair (exact route).  Each entry
    is a lower bound for ||H_phi|| = dist_{L^inf}(phi, H^inf); the running
    maximum over sizes is returned so that rounding in the SVD can never
    break monotonicity.  With ``raw=True`` also return the per-size values.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be increasing")
    vals = [float(_sections(phi, m).singular_values()[0]) if m > 0 else 0.0 for m in sizes]
    bounds = list(np.maximum.accumulate(vals)) if vals else []
    bounds = [float(b) for b in bounds]
    return (bounds, vals) if raw else bounds


def compactness_profile(phi, sizes=(64, 128, 256), k_max: int = 32) -> dict:
    """{m: sigma_1..sigma_k_max} of the m-sections; decay in k is the diagnostic."""
    if isinstance(sizes, int):
        sizes = (sizes,)
    out = {}
    for m in sizes:
        if k_max > m:
            raise ValueError("k_max must not exceed the section size")
        sv = _sections(phi, m).singular_values()
        out[int(m)] = [float(s) for s in sv[:k_max]]
    return out


# ---------------------------------------------------------------------------
# Gram spectra


def _eigh_extremes(G) -> tuple:
    G = np.asarray(G, dtype=complex)
    if G.shape[0] > MAX_DENSE:
        raise ValueError(f"matrix size {G.shape[0]} exceeds {MAX_DENSE}")
    ev = scipy.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return float(ev[0]), float(ev[-1])


def riesz_bounds(G) -> tuple:
    """(lambda_min, lambda_max) of a Hermitian Gram matrix."""
    return _eigh_extremes(G)


def riesz_profile(G) -> list:
    """riesz_bounds of every leading principal section 1..n."""
    G = np.asarray(G)
    return [riesz_bounds(G[:k, :k]) for k in range(1, G.shape[0] + 1)]


def aos_tail_constants(G, n_list=None) -> list:
    """[(N, c_N, C_N)]: extreme eigenvalues of the trailing block G[N:, N:]."""
    G = np.asarray(G)
    if n_list is None:
        n_list = range(G.shape[0])
    out = []
    for n in n_list:
        if n >= G.shape[0]:
            continue
        c, C = _eigh_extremes(G[n:, n:])
        out.append((int(n), c, C))
    return out


def orthogonalizer_norm_trace(G):
    """(||x_n||^2 trace, ||x_n^*||^2 trace, dist^2(x_n, span of the others)).

    The biorthogonal norms are the diagonal of G^{-1} and the distance of
    x_n to the other vectors is 1 / (G^{-1})_{nn}.
    """
    G = np.asarray(G, dtype=complex)
    G = 0.5 * (G + G.conj().T)
    ev = scipy.linalg.eigvalsh(G)
    cond = ev[-1] / ev[0] if ev[0] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise IllConditioned(f"Gram condition estimate {cond:.3e}", cond)
    inv_diag = np.real(np.diag(scipy.linalg.inv(G)))
    norms = np.real(np.diag(G))
    return [float(v) for v in norms], [float(v) for v in inv_diag], [float(1 / v) for v in inv_diag]


def mw_projection_gram(theta: SchurFn, seq: DiscSequence, grid: CircleGrid | None = None) -> np.ndarray:
    """Gram of {P_theta l_n}.

    Exact (finite-dimensional) when theta is a Blaschke node with distinct
    zeros, quadrature otherwise.
    """
    if isinstance(theta, BlaschkeNode) and _distinct(theta.zeros):
        funcs = [(lambda z, i=i: malmquist_walsh(seq, i, z)) for i in range(len(seq))]
        return blaschke_projected_gram(theta.zeros, funcs)
    return projected_mw_gram(theta, seq, grid=grid)


def _distinct(zeros) -> bool:
    z = list(zeros)
    return all(pseudohyperbolic(z[i], z[j]) > 1e-12 for i in range(len(z)) for j in range(i))


@dataclass
class TailDeviation:
    eps: float
    start: int
    gram_dev: float
    norm_dev: float
    max_theta: float

    @property
    def constant(self) -> float:
        """Measured C in ||G_tail - I||_max <= C eps."""
        return self.gram_dev / self.eps


def gram_tail_deviation(theta: SchurFn, seq: DiscSequence, eps: float, G=None) -> TailDeviation:
    """Deviation from the identity of the Gram of {P_theta l_n} on the eps-tail.

    The tail starts at the first index after which every |theta(lam_n)| <= eps.
    """
    tv = np.abs(np.asarray(theta(seq.array)))
    suffix_max = np.maximum.accumulate(tv[::-1])[::-1]
    hits = np.nonzero(suffix_max <= eps)[0]
    if hits.size == 0:
        raise ValueError(f"no tail with |theta(lam_n)| <= {eps}")
    start = int(hits[0])
    G = mw_projection_gram(theta, seq) if G is None else G
    T = G[start:, start:]
    dev = float(np.max(np.abs(T - np.eye(T.shape[0]))))
    ndev = float(np.max(np.abs(np.real(np.diag(T)) - 1.0)))
    return TailDeviation(eps, start, dev, ndev, float(suffix_max[start]))


# ---------------------------------------------------------------------------
# reports


@dataclass
class SpectralReport:
    """Long-format container: rows of (quantity, size, index, value)."""

    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, quantity: str, size, index, value):
        self.rows.append((quantity, size, index, float(value)))

    def add_series(self, quantity: str, size, values):
        for i, v in enumerate(values):
            self.add(quantity, size, i, v)

    def get(self, quantity: str, size=None) -> list:
        return [r[3] for r in self.rows if r[0] == quantity and (size is None or r[1] == size)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("quantity", "size", "index", "value"))
        for q, s, i, v in self.rows:
            w.writerow((q, "" if s is None else s, "" if i is None else i, repr(v)))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"meta": self.meta,
                "rows": [{"quantity": q, "size": s, "index": i, "value": v} for q, s, i, v in self.rows]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def spectral_report(G, hankel_phi=None, sizes=(), k_max: int = 8, aos_list=None) -> SpectralReport:
    """Gram extremes per truncation, AOS tail constants and optional Hankel profiles."""
    rep = SpectralReport()
    for k, (lo, hi) in enumerate(riesz_profile(G), start=1):
        rep.add("lambda_min", k, None, lo)
        rep.add("lambda_max", k, None, hi)
    for n, c, C in aos_tail_constants(G, aos_list):
        rep.add("aos_c", None, n, c)
        rep.add("aos_C", None, n, C)
    if hankel_phi is not None:
        for m in sizes:
            sv = _sections(hankel_phi, m).singular_values()
            rep.add_series("sigma", m, sv[:min(k_max, m)])
    return rep


@dataclass
class CrossBasisReport:
    """Paired diagnostics for (Lambda, M); ``forward`` is Lambda-side, ``backward`` M-side."""

    forward: dict
    backward: dict

    def swapped(self) -> "CrossBasisReport":
        return CrossBasisReport(self.backward, self.forward)

    def to_json(self) -> dict:
        return {"forward": self.forward, "backward": self.backward}


def _one_side(nodes: DiscSequence, zeros: DiscSequence, hankel_sizes, k_max) -> dict:
    theta = BlaschkeNode(zeros.points)
    vanishing = [float(v) for v in np.abs(theta(nodes.array))]
    G = gram_kernels(KernelFamilySpec(theta, nodes), normalized=True)
    prof = riesz_profile(G)
    hankel = {}
    for m in hankel_sizes:
        sv = hankel_section_rational(theta, nodes, m).singular_values()
        hankel[int(m)] = [float(s) for s in sv[:min(k_max, m)]]
    return {
        "vanishing": vanishing,
        "tail_sup": [float(v) for v in np.maximum.accumulate(np.asarray(vanishing)[::-1])[::-1]],
        "lambda_min": [p[0] for p in prof],
        "lambda_max": [p[1] for p in prof],
        "hankel_sigma": hankel,
        "carleson": nodes.carleson_constant,
    }


def cross_basis_experiment(lam: DiscSequence, mu: DiscSequence, hankel_sizes=(16, 32),
                           k_max: int = 16) -> CrossBasisReport:
    """Both directions of the two-sequence Riesz-basis experiment.

    forward: kernels of K_{B_M} at Lambda, |B_M(lambda_n)|, symbol B_M conj(B_Lambda);
    backward: the same with the roles of Lambda and M exchanged.
    """
    for name, s in (("Lambda", lam), ("M", mu)):
        if s.carleson_constant <= CARLESON_MIN:
            raise CarlesonTooSmall(
                f"{name} has Carleson constant {s.carleson_constant:.3g} <= {CARLESON_MIN}")
    if any(mu.contains(p) for p in lam):
        raise ValueError("Lambda and M must be disjoint")
    return CrossBasisReport(_one_side(lam, mu, hankel_sizes, k_max),
                            _one_side(mu, lam, hankel_sizes, k_max))
