"""Reproducing kernels of model spaces and closed-form distance formulas.

All distances are squared H^2 distances.  The formulas are driven by the
forward Schur recursion only; the independent checks live in
:mod:`schurnev.oracle`.

Index convention (fixed by direct Gram computation): the distance from a
normalized kernel to the span of the first ``m`` kernels uses the
prefactor |B_{0,m-1}(mu)|^2 and the product over k = 1..m.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .disc import DiscSequence, as_disc_point, blaschke_factor, blaschke_partial, blaschke_product
from .errors import DegenerateKernel, TerminatedRecursion
from .schur import SchurFn, require_depth, schur_forward, schur_values

DEGENERATE_TOL = 1e-12


def _safe_prod(factors) -> float:
    f = np.asarray(factors, dtype=float)
    if f.size == 0:
        return 1.0
    if np.any(f < 1e-8):
        with np.errstate(divide="ignore"):
            return float(np.exp(np.sum(np.log(f))))
    return float(np.prod(f))


def _one_minus_sq(w) -> float:
    a = abs(w)
    # a terminated recursion leaves |theta_m| = 1 up to rounding
    return max((1.0 - a) * (1.0 + a), 0.0)


def model_kernel(theta: SchurFn, lam, z):
    """k_theta(lam, z) = (1 - conj(theta(lam)) theta(z)) / (1 - conj(lam) z)."""
    lam = as_disc_point(lam)
    t = complex(theta(lam))
    if abs(t) >= 1.0 - DEGENERATE_TOL:
        raise DegenerateKernel(f"|theta({lam!r})| = {abs(t)} makes the kernel vanish")
    return (1.0 - np.conj(t) * theta(z)) / (1.0 - np.conj(lam) * z)


def kernel_norm_sq(theta: SchurFn, lam) -> float:
    lam = as_disc_point(lam)
    t = complex(theta(lam))
    if abs(t) >= 1.0 - DEGENERATE_TOL:
        raise DegenerateKernel(f"|theta({lam!r})| = {abs(t)} makes the kernel vanish")
    return _one_minus_sq(t) / _one_minus_sq(lam)


def normalized_model_kernel(theta: SchurFn, lam, z):
    return model_kernel(theta, lam, z) / np.sqrt(kernel_norm_sq(theta, lam))


def szego_kernel(lam, z, normalized: bool = False):
    lam = complex(lam)
    k = 1.0 / (1.0 - np.conj(lam) * z)
    return k * np.sqrt(_one_minus_sq(lam)) if normalized else k


@dataclass(frozen=True)
class KernelFamilySpec:
    theta: SchurFn
    seq: DiscSequence
    inner: bool = True


def gram_kernels(spec: KernelFamilySpec, normalized: bool = False) -> np.ndarray:
    """G[m, n] = <k_theta(lam_n), k_theta(lam_m)> = k_theta(lam_n, lam_m), no quadrature."""
    pts = spec.seq.array
    if pts.size == 0:
        raise ValueError("empty kernel family")
    t = np.asarray(spec.theta(pts), dtype=complex)
    if np.any(np.abs(t) >= 1.0 - DEGENERATE_TOL):
        raise DegenerateKernel("a node kernel vanishes identically")
    G = (1.0 - t[:, None] * np.conj(t)[None, :]) / (1.0 - pts[:, None] * np.conj(pts)[None, :])
    G = 0.5 * (G + G.conj().T)
    if normalized:
        d = np.sqrt(np.real(np.diag(G)))
        G = G / d[:, None] / d[None, :]
        np.fill_diagonal(G, 1.0)
    return G


def szego_gram(seq: DiscSequence, normalized: bool = False) -> np.ndarray:
    pts = seq.array
    G = 1.0 / (1.0 - pts[:, None] * np.conj(pts)[None, :])
    if normalized:
        d = np.sqrt(np.real(np.diag(G)))
        G = G / d[:, None] / d[None, :]
        np.fill_diagonal(G, 1.0)
    return G


def malmquist_walsh(seq: DiscSequence, n: int, z):
    """l_n(z) = B_{0,n-1}(z) sqrt(1 - |lam_n|^2) / (1 - conj(lam_n) z)."""
    if not 0 <= n < len(seq):
        raise IndexError(f"index {n} out of range for a sequence of {len(seq)} points")
    return blaschke_partial(seq, 0, n - 1, z) * szego_kernel(seq[n], z, normalized=True)


# ---------------------------------------------------------------------------
# distance formulas


def _forward(theta, seq, depth):
    params, thetas = schur_forward(theta, seq, depth)
    require_depth(params, depth)
    return params, thetas


def _ratio_product(vals, seq, point, upto) -> float:
    """prod_{k=1}^{upto} (1 - |theta_k(p)|^2) / (1 - |theta_k(p)|^2 |b_{lam_{k-1}}(p)|^2)."""
    factors = []
    for k in range(1, upto + 1):
        t2 = abs(vals[k]) ** 2
        b2 = abs(blaschke_factor(seq[k - 1], point)) ** 2
        factors.append(_one_minus_sq(vals[k]) / (1.0 - t2 * b2))
    return _safe_prod(factors)


def _gamma_product(vals, params, upto) -> float:
    """prod_{k=0}^{upto-1} |1 - conj(gamma_k) theta_k(p)|^2 / (1 - |gamma_k|^2)."""
    factors = [abs(1.0 - np.conj(params[k]) * vals[k]) ** 2 / _one_minus_sq(params[k])
               for k in range(upto)]
    return _safe_prod(factors)


def dist_mw(theta: SchurFn, seq: DiscSequence, n: int) -> float:
    """dist^2(P_theta l_n, span{k_theta(lam_0), ..., k_theta(lam_{n-1})})."""
    params, thetas = _forward(theta, seq, n)
    lam = seq[n]
    vals = schur_values(thetas, params, seq, lam, n)
    return _one_minus_sq(vals[0]) * _ratio_product(vals, seq, lam, n)


def dist_nrk(theta: SchurFn, seq: DiscSequence, mu) -> float:
    """dist^2(normalized k_theta(mu), span of the kernels at all points of ``seq``)."""
    mu = as_disc_point(mu)
    m = len(seq)
    if seq.contains(mu):
        raise ValueError("mu must not be a node")
    kernel_norm_sq(theta, mu)
    params, thetas = _forward(theta, seq, m)
    vals = schur_values(thetas, params, seq, mu, m)
    b2 = abs(blaschke_product(seq.points, mu)) ** 2
    return float(b2 * _ratio_product(vals, seq, mu, m))


def dist_nrk_gamma_form(theta: SchurFn, seq: DiscSequence, mu) -> float:
    """Same distance as :func:`dist_nrk` through the coefficient form."""
    mu = as_disc_point(mu)
    m = len(seq)
    if seq.contains(mu):
        raise ValueError("mu must not be a node")
    kernel_norm_sq(theta, mu)
    params, thetas = _forward(theta, seq, m)
    vals = schur_values(thetas, params, seq, mu, m)
    b2 = abs(blaschke_product(seq.points, mu)) ** 2
    return float(b2 / _one_minus_sq(vals[0]) * _one_minus_sq(vals[m])
                 * _gamma_product(vals, params, m))


def verify_useful_identity(theta: SchurFn, seq: DiscSequence, mu, n: int):
    """Evaluate both sides of the product identity; returns (lhs, rhs, abs_error).

    lhs = (1 - |theta(mu)|^2) prod_{k=1}^n (1-|theta_k|^2)/(1-|theta_k b_{k-1}|^2)
    rhs = (1 - |theta_n(mu)|^2) prod_{k=0}^{n-1} |1 - conj(gamma_k) theta_k|^2/(1-|gamma_k|^2)
    """
    mu = as_disc_point(mu)
    params, thetas = _forward(theta, seq, n)
    vals = schur_values(thetas, params, seq, mu, n)
    lhs = _one_minus_sq(vals[0]) * _ratio_product(vals, seq, mu, n)
    rhs = _one_minus_sq(vals[n]) * _gamma_product(vals, params, n)
    return lhs, rhs, abs(lhs - rhs)


def dist_plmu(theta: SchurFn, seq: DiscSequence, mu) -> float:
    """dist^2(P_theta l_mu, span K_{Lambda,theta}) for finite Lambda = seq.

    l_mu = sqrt(1 - |mu|^2)/(1 - conj(mu) z) * B_Lambda(z).
    """
    mu = as_disc_point(mu)
    m = len(seq)
    if seq.contains(mu):
        raise ValueError("mu must not be a node")
    params, thetas = _forward(theta, seq, m)
    vals = schur_values(thetas, params, seq, mu, m)
    return float(_one_minus_sq(vals[m]) * _gamma_product(vals, params, m))


def dist_excluded_node(theta: SchurFn, seq: DiscSequence, n: int, depth: int | None = None) -> float:
    """dist^2(normalized k_theta(lam_n), span of the kernels at the other nodes).

    The remaining nodes are taken in their original order, truncated to the
    first ``depth`` of them, and the recursion is run on that reduced
    sequence (the span does not depend on the order of the nodes).
    """
    if not 0 <= n < len(seq):
        raise IndexError(n)
    rest = seq.without(n)
    if depth is not None:
        rest = rest[:depth]
    if len(rest) == 0:
        return 1.0
    return dist_nrk(theta, rest, seq[n])


def excluded_node_ratio(theta: SchurFn, seq: DiscSequence, n: int) -> float:
    """dist_excluded_node / |B_{Lambda minus lam_n}(lam_n)|^2.

    The product part of the excluded-node distance; it tends to 1 along
    asymptotically orthonormal kernel families.
    """
    b2 = abs(blaschke_product(seq.without(n).points, seq[n])) ** 2
    return dist_excluded_node(theta, seq, n) / b2


# ---------------------------------------------------------------------------
# traces


@dataclass
class TraceEntry:
    n: int
    closed_form: float
    oracle: float | None = None
    discrepancy: float | None = None
    ratio_to_szego: float | None = None
    partial_sum_theta_sq: float | None = None
    drift: float | None = None


@dataclass
class DistanceTrace:
    entries: list = field(default_factory=list)
    status: str = "complete"
    label: str = ""

    COLUMNS = ("n", "closed_form", "oracle", "discrepancy", "ratio_to_szego",
               "partial_sum_theta_sq", "drift")

    def column(self, name: str) -> list:
        return [getattr(e, name) for e in self.entries]

    def is_monotone(self, atol: float = 1e-13) -> bool:
        cf = self.column("closed_form")
        return all(b <= a + atol for a, b in zip(cf, cf[1:]))

    def max_discrepancy(self) -> float:
        d = [e.discrepancy for e in self.entries if e.discrepancy is not None]
        return max(d) if d else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for e in self.entries:
            w.writerow([_fmt(getattr(e, c)) for c in self.COLUMNS])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"label": self.label, "status": self.status,
                "entries": [{c: getattr(e, c) for c in self.COLUMNS} for e in self.entries]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def completeness_trace(theta: SchurFn, seq: DiscSequence, mu, n_max: int | None = None,
                       oracle: bool = True) -> DistanceTrace:
    """Distances of the normalized kernel at ``mu`` to the spans of the first n kernels.

    Row n holds the closed-form distance (n = 0 is the empty span), its
    ratio to the Szego distance |B_{0,n-1}(mu)|^2, the partial sum
    sum_{k=1}^n |theta_k(mu)|^2 and, if ``oracle``, the Gram-matrix distance.
    The trace stops early (status ``terminated``) when the recursion does.
    """
    from .oracle import kernel_gram_distance

    mu = as_disc_point(mu)
    n_max = len(seq) if n_max is None else n_max
    if seq[:n_max].contains(mu):
        raise ValueError("mu must not be a node")
    params, thetas = schur_forward(theta, seq, n_max)
    reach = min(n_max, len(thetas) - 1)
    vals = schur_values(thetas, params, seq, mu, reach)
    trace = DistanceTrace(label=f"completeness mu={mu}")
    t0 = _one_minus_sq(vals[0])
    psum = 0.0
    for n in range(0, reach + 1):
        if n >= 1:
            psum += abs(vals[n]) ** 2
        b2 = abs(blaschke_product(seq.points[:n], mu)) ** 2
        cf = b2 / t0 * _one_minus_sq(vals[n]) * _gamma_product(vals, params, n)
        cf = max(cf, 0.0)
        e = TraceEntry(n=n, closed_form=cf, ratio_to_szego=cf / b2 if b2 > 0 else None,
                       partial_sum_theta_sq=psum)
        if oracle:
            try:
                ov = kernel_gram_distance(theta, seq[:n], mu)
                e.oracle = ov
                e.discrepancy = abs(ov - cf)
            except Exception:  # noqa: BLE001 - oracle failure is reported, not fatal
                e.oracle = None
        trace.entries.append(e)
    if params.terminated and params.terminated_at <= n_max:
        trace.status = f"terminated_at_{params.terminated_at}"
    return trace
