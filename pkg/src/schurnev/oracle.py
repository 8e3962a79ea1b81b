"""Brute-force verification layer.

H^2 inner products by trapezoidal quadrature on a uniform circle grid,
FFT-based Riesz projection, the model-space projection
P_theta f = f - theta P_+(conj(theta) f), Gram-matrix least-squares
distances and the matrix of theta(T_B) in the Malmquist-Walsh basis.

Nothing here calls the Schur recursion: every value is obtained from
pointwise evaluations of the symbols and linear algebra, so the module can
be used to check the closed forms in :mod:`schurnev.kernels`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .disc import DiscSequence, as_disc_point, blaschke_product
from .errors import (EvaluationError, GridMismatch, IllConditioned, NotAnalytic,
                     SymbolSingularOnGrid)
from .kernels import kernel_norm_sq, malmquist_walsh, model_kernel, szego_kernel
from .schur import ATOM_TOL, SchurFn

DEFAULT_N = 4096
RIDGE = 1e-13
MAX_CONDITION = 1e12
ANALYTIC_TOL = 1e-9


@dataclass(frozen=True)
class CircleGrid:
    """N equispaced nodes exp(2 pi i j / N) on the unit circle."""

    n: int = DEFAULT_N

    def __post_init__(self):
        if self.n < 256:
            raise ValueError("grid size must be at least 256")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.n) / self.n)

    def sample(self, f) -> "GridFn":
        """GridFn of a callable (or a SchurFn) on the nodes."""
        if isinstance(f, SchurFn):
            return GridFn(self, boundary_values(f, self)[0])
        return GridFn(self, np.asarray(f(self.nodes), dtype=complex))


@dataclass(frozen=True, eq=False)
class GridFn:
    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise GridMismatch(f"expected {self.grid.n} values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @cached_property
    def fourier(self) -> np.ndarray:
        """Coefficients c_k for k = -N/2 .. N/2 - 1 (in that order)."""
        return np.fft.fftshift(np.fft.fft(self.values) / self.grid.n)

    def coefficient(self, k: int) -> complex:
        n = self.grid.n
        if not -n // 2 <= k < n // 2:
            raise IndexError(k)
        return complex(self.fourier[k + n // 2])

    def norm_sq(self) -> float:
        return float(np.mean(np.abs(self.values) ** 2))

    def negative_mass(self) -> float:
        c = self.fourier
        return float(np.sqrt(np.sum(np.abs(c[: self.grid.n // 2]) ** 2)))

    def _same(self, other: "GridFn"):
        if self.grid.n != other.grid.n:
            raise GridMismatch(f"grids of size {self.grid.n} and {other.grid.n}")

    def __add__(self, other):
        self._same(other)
        return GridFn(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._same(other)
        return GridFn(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, GridFn):
            self._same(other)
            return GridFn(self.grid, self.values * other.values)
        return GridFn(self.grid, self.values * other)

    __rmul__ = __mul__

    def conj(self) -> "GridFn":
        return GridFn(self.grid, np.conj(self.values))

    def to_json(self) -> dict:
        return {"n": self.grid.n, "values": [[float(v.real), float(v.imag)] for v in self.values]}

    @classmethod
    def from_json(cls, data) -> "GridFn":
        if isinstance(data, str):
            data = json.loads(data)
        vals = np.array([complex(a, b) for a, b in data["values"]])
        return cls(CircleGrid(int(data["n"])), vals)


def boundary_values(f: SchurFn, grid: CircleGrid):
    """Values of ``f`` on the grid and an accuracy-caveat flag.

    Nodes within ATOM_TOL of a singular atom are set to 0 (a null set for
    the quadrature); the flag is raised whenever the symbol carries atoms,
    since the spectral accuracy of the grid no longer applies.
    """
    z = grid.nodes
    atoms = f.atoms()
    if not atoms:
        try:
            return np.asarray(f(z), dtype=complex), False
        except EvaluationError as exc:
            raise SymbolSingularOnGrid(str(exc)) from exc
    bad = np.zeros(z.shape, dtype=bool)
    for a in atoms:
        bad |= np.abs(z - a) <= 10 * ATOM_TOL
    out = np.zeros(z.shape, dtype=complex)
    try:
        out[~bad] = f(z[~bad])
    except EvaluationError as exc:
        raise SymbolSingularOnGrid(str(exc)) from exc
    return out, True


def inner_product(f: GridFn, g: GridFn) -> complex:
    """<f, g> = mean(f conj(g)) over the grid."""
    f._same(g)
    return complex(np.mean(f.values * np.conj(g.values)))


def analytic_projection(f: GridFn) -> GridFn:
    """P_+ f: zero every Fourier coefficient of negative index."""
    n = f.grid.n
    c = np.fft.fft(f.values)
    c[n // 2:] = 0.0
    return GridFn(f.grid, np.fft.ifft(c))


def antianalytic_projection(f: GridFn) -> GridFn:
    """P_- f = f - P_+ f."""
    return f - analytic_projection(f)


def cauchy_value(f: GridFn, z: complex) -> complex:
    """(P_+ f)(z) = <f, k_z> for |z| < 1, by quadrature."""
    return complex(np.mean(f.values / (1.0 - z * np.conj(f.grid.nodes))))


def model_projection(theta, f: GridFn) -> GridFn:
    """P_theta f = f - theta P_+(conj(theta) f) for f in H^2."""
    if f.negative_mass() > ANALYTIC_TOL * max(1.0, np.sqrt(f.norm_sq())):
        raise NotAnalytic(f"negative spectrum of mass {f.negative_mass():.3e}")
    th = theta if isinstance(theta, GridFn) else f.grid.sample(theta)
    return f - th * analytic_projection(th.conj() * f)


# ---------------------------------------------------------------------------
# Gram distances


def gram_distance(w, x_norm_sq: float, G) -> float:
    """dist^2 = ||x||^2 - w^* G^{-1} w, clamped at 0.

    ``w[i] = <x, v_i>`` and ``G[i, j] = <v_j, v_i>``.  After scaling G to
    unit diagonal, the distance is the square of the last Cholesky pivot of
    the bordered matrix [[G, w], [w^*, ||x||^2]]; that Schur complement is
    accurate to rounding in absolute terms, independent of cond(G).  If
    the bordered matrix is numerically singular (x in the span) the
    solve falls back to G plus a relative ridge of 1e-13.  Condition
    estimates above 1e12 raise :class:`IllConditioned`.
    """
    w = np.asarray(w, dtype=complex).reshape(-1)
    G = np.asarray(G, dtype=complex)
    if w.size == 0:
        return max(float(x_norm_sq), 0.0)
    G = 0.5 * (G + G.conj().T)
    d = np.sqrt(np.real(np.diag(G)))
    if np.any(d <= 0):
        raise IllConditioned("Gram matrix has a zero diagonal entry", np.inf)
    Gs = G / d[:, None] / d[None, :]
    ws = w / d
    ev = np.linalg.eigvalsh(Gs)
    cond = ev[-1] / ev[0] if ev[0] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise IllConditioned(f"Gram condition estimate {cond:.3e}", cond)
    m = len(ws)
    H = np.empty((m + 1, m + 1), dtype=complex)
    H[:m, :m] = Gs
    H[:m, m] = ws
    H[m, :m] = np.conj(ws)
    H[m, m] = x_norm_sq
    try:
        L = scipy.linalg.cholesky(H, lower=True)
        return float(abs(L[m, m]) ** 2)
    except scipy.linalg.LinAlgError:
        cho = scipy.linalg.cho_factor(Gs + RIDGE * np.eye(m), lower=True)
        c = scipy.linalg.cho_solve(cho, ws)
        return max(float(x_norm_sq - np.real(np.vdot(ws, c))), 0.0)


def kernel_gram_distance(theta: SchurFn, seq: DiscSequence, mu) -> float:
    """Quadrature-free dist^2 from the normalized k_theta(mu) to span of node kernels.

    Uses only the reproducing property: <k_theta(a), k_theta(b)> = k_theta(a, b).
    """
    from .kernels import KernelFamilySpec, gram_kernels

    mu = as_disc_point(mu)
    if len(seq) == 0:
        return 1.0
    G = gram_kernels(KernelFamilySpec(theta, seq))
    w = np.asarray(model_kernel(theta, mu, seq.array)) / np.sqrt(kernel_norm_sq(theta, mu))
    return gram_distance(w, 1.0, G)


def szego_distance(seq: DiscSequence, mu) -> float:
    """Quadrature-free dist^2 from the normalized Szego kernel at mu to span of k(lam_i)."""
    mu = as_disc_point(mu)
    pts = seq.array
    G = 1.0 / (1.0 - pts[:, None] * np.conj(pts)[None, :])
    w = szego_kernel(mu, pts, normalized=True)
    return gram_distance(w, 1.0, G)


def span_distance(x: GridFn, family) -> float:
    """Quadrature dist^2 of ``x`` to the span of the GridFns in ``family``.

    Householder QR of the sampled columns [v_0, ..., v_{m-1}, x]; the last
    diagonal entry of R is the residual norm.  Forming the Gram would square
    the conditioning of the family, QR does not.
    """
    family = list(family)
    if not family:
        return x.norm_sq()
    m = len(family)
    M = np.stack([v.values for v in family] + [x.values], axis=1) / np.sqrt(x.grid.n)
    scale = np.linalg.norm(M[:, :m], axis=0)
    if np.any(scale == 0):
        raise IllConditioned("family contains a zero function", np.inf)
    M[:, :m] /= scale
    R = scipy.linalg.qr(M, mode="r")[0]
    sv = np.abs(np.diag(R[:m, :m]))
    cond = (np.linalg.cond(R[:m, :m]) if sv.min() > 0 else np.inf) ** 2
    if cond > MAX_CONDITION:
        raise IllConditioned(f"Gram condition estimate {cond:.3e}", cond)
    return float(abs(R[m, m]) ** 2)


def _kernel_gridfns(theta, seq, grid, th=None):
    th = th if th is not None else grid.sample(theta)
    out = []
    for lam in seq:
        t = complex(theta(lam))
        out.append(GridFn(grid, (1.0 - np.conj(t) * th.values) / (1.0 - np.conj(lam) * grid.nodes)))
    return out


def oracle_dist_mw(theta: SchurFn, seq: DiscSequence, n: int, grid: CircleGrid | None = None) -> float:
    """Quadrature dist^2(P_theta l_n, span{k_theta(lam_k)}_{k<n})."""
    grid = grid or CircleGrid()
    th = grid.sample(theta)
    ln = GridFn(grid, malmquist_walsh(seq, n, grid.nodes))
    x = model_projection(th, ln)
    return span_distance(x, _kernel_gridfns(theta, seq[:n], grid, th))


def oracle_dist_plmu(theta: SchurFn, seq: DiscSequence, mu, grid: CircleGrid | None = None) -> float:
    """Quadrature dist^2(P_theta l_mu, span K_{Lambda,theta}) for finite Lambda."""
    grid = grid or CircleGrid()
    mu = as_disc_point(mu)
    th = grid.sample(theta)
    lmu = GridFn(grid, szego_kernel(mu, grid.nodes, normalized=True)
                 * blaschke_product(seq.points, grid.nodes))
    x = model_projection(th, lmu)
    return span_distance(x, _kernel_gridfns(theta, seq, grid, th))


def oracle_dist_nrk(theta: SchurFn, seq: DiscSequence, mu, grid: CircleGrid | None = None) -> float:
    """Quadrature version of the kernel distance (used for drift reports)."""
    grid = grid or CircleGrid()
    mu = as_disc_point(mu)
    th = grid.sample(theta)
    x = _kernel_gridfns(theta, DiscSequence((mu,)), grid, th)[0]
    x = x * (1.0 / np.sqrt(kernel_norm_sq(theta, mu)))
    return span_distance(x, _kernel_gridfns(theta, seq, grid, th))


def with_drift(fn, *args, n: int = DEFAULT_N):
    """(value at N, |value at N - value at 2N|) for a grid-based oracle ``fn``."""
    a = fn(*args, grid=CircleGrid(n))
    b = fn(*args, grid=CircleGrid(2 * n))
    return a, abs(a - b)


# ---------------------------------------------------------------------------
# model operator


def mw_gridfns(seq: DiscSequence, n: int, grid: CircleGrid) -> list:
    return [GridFn(grid, malmquist_walsh(seq, i, grid.nodes)) for i in range(n)]


def theta_TB_matrix(theta: SchurFn, seq: DiscSequence, n: int | None = None,
                    grid: CircleGrid | None = None) -> np.ndarray:
    """A[i, j] = <theta l_j, l_i>, the matrix of theta(T_B) in the Malmquist-Walsh basis."""
    grid = grid or CircleGrid()
    n = len(seq) if n is None else n
    if n > len(seq):
        raise ValueError("matrix size exceeds the sequence length")
    th = grid.sample(theta)
    L = np.stack([g.values for g in mw_gridfns(seq, n, grid)])
    return (np.conj(L) @ (th.values[None, :] * L).T) / grid.n


def projected_mw_gram(theta: SchurFn, seq: DiscSequence, n: int | None = None,
                      grid: CircleGrid | None = None) -> np.ndarray:
    """G[i, j] = <P_theta l_j, l_i> by quadrature.

    For inner theta this is the Gram <P_theta l_j, P_theta l_i>.  For other
    Schur functions f - theta P_+(conj(theta) f) is not a projection and
    the compressed form is the one equal to I - A A^*.
    """
    grid = grid or CircleGrid()
    n = len(seq) if n is None else n
    th = grid.sample(theta)
    L = mw_gridfns(seq, n, grid)
    P = np.stack([model_projection(th, g).values for g in L])
    V = np.stack([g.values for g in L])
    return (np.conj(V) @ P.T) / grid.n


def lemma_g_check(theta: SchurFn, seq: DiscSequence, n: int | None = None,
                  grid: CircleGrid | None = None) -> float:
    """max |Gram{P_theta l_i} - (I - A A^*)| entrywise."""
    grid = grid or CircleGrid()
    n = len(seq) if n is None else n
    A = theta_TB_matrix(theta, seq, n, grid)
    G = projected_mw_gram(theta, seq, n, grid)
    return float(np.max(np.abs(G - (np.eye(n) - A @ A.conj().T))))


def blaschke_projected_gram(zeros, funcs) -> np.ndarray:
    """Exact Gram of {P_B f} for a finite Blaschke B with distinct zeros.

    K_B is spanned by the Szego kernels at the zeros, and
    <P_B f, P_B g> = g(M)^* K^{-1} f(M) with K the Szego Gram of the zeros.
    ``funcs`` are callables evaluated at the zeros.
    """
    zs = DiscSequence(tuple(zeros))
    pts = zs.array
    d = np.sqrt((1.0 - np.abs(pts)) * (1.0 + np.abs(pts)))
    K = (d[:, None] * d[None, :]) / (1.0 - pts[:, None] * np.conj(pts)[None, :])
    F = np.stack([np.asarray(f(pts), dtype=complex) * d for f in funcs], axis=1)
    cho = scipy.linalg.cho_factor(0.5 * (K + K.conj().T), lower=True)
    X = scipy.linalg.cho_solve(cho, F)
    return F.conj().T @ X


def adjoint_eigen_check(theta: SchurFn, lam, B: DiscSequence,
                        grid: CircleGrid | None = None) -> float:
    """|| P_+(conj(theta) k~_B(lam)) - conj(theta(lam)) k~_B(lam) ||_2 for a node lam of B."""
    grid = grid or CircleGrid()
    lam = as_disc_point(lam)
    if not B.contains(lam, 1e-12):
        raise ValueError("lam must be a node of B")
    th = grid.sample(theta)
    # k_B(lam, .) is the Szego kernel since B(lam) = 0
    k = GridFn(grid, szego_kernel(lam, grid.nodes, normalized=True))
    res = analytic_projection(th.conj() * k) - k * np.conj(complex(theta(lam)))
    return float(np.sqrt(res.norm_sq()))


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(a, b) for a, b in row] for row in data])


def matrix_to_csv(M) -> str:
    M = np.asarray(M, dtype=complex)
    lines = ["row," + ",".join(str(j) for j in range(M.shape[1]))]
    for i, row in enumerate(M):
        lines.append(str(i) + "," + ",".join(repr(complex(v)) for v in row))
    return "\n".join(lines) + "\n"
