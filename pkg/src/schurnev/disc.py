"""Primitives on the unit disc.

Moebius maps, Blaschke factors and partial products, the pseudohyperbolic
metric and the separation diagnostics of finite point sequences
(Blaschke sum, Carleson constant, thinness profile).  All functions accept
scalars or numpy arrays for the evaluation variable ``z``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DuplicatePoint, InvalidPoint

DUPLICATE_TOL = 1e-12
LOG_PRODUCT_THRESHOLD = 64

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def as_disc_point(value) -> complex:
    """Coerce ``value`` to a complex number strictly inside the unit disc."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        value = complex(value[0], value[1])
    z = complex(value)
    if not np.isfinite(z.real) or not np.isfinite(z.imag) or abs(z) >= 1.0:
        raise InvalidPoint(f"point {z!r} is not in the open unit disc")
    return z


def moebius(mu, z):
    """The disc automorphism (z - mu) / (1 - conj(mu) z)."""
    mu = complex(mu)
    return (z - mu) / (1.0 - np.conj(mu) * z)


def blaschke_factor(lam, z):
    """Blaschke factor with zero at ``lam``, normalized so that b(0) = |lam|.

    For ``lam == 0`` the factor is ``z`` itself.
    """
    lam = complex(lam)
    if lam == 0:
        return z * (1.0 + 0j)
    # phase from the argument: conj(lam)/|lam| overflows for subnormal lam
    unit = complex(np.exp(-1j * np.angle(lam)))
    return unit * (lam - z) / (1.0 - np.conj(lam) * z)


def pseudohyperbolic(z, w):
    """rho(z, w) = |z - w| / |1 - conj(w) z|."""
    return np.abs(moebius(w, z))


def _product(factors: np.ndarray, axis=0):
    """Product along ``axis``; log-modulus + argument accumulation for long products."""
    factors = np.asarray(factors, dtype=complex)
    if factors.shape[axis] <= LOG_PRODUCT_THRESHOLD:
        return np.prod(factors, axis=axis)
    with np.errstate(divide="ignore"):
        logmod = np.sum(np.log(np.abs(factors)), axis=axis)
    arg = np.sum(np.angle(factors), axis=axis)
    return np.exp(logmod) * np.exp(1j * arg)


def blaschke_product(zeros, z, prefactor: complex = 1.0):
    """Product of :func:`blaschke_factor` over ``zeros`` (repeats allowed)."""
    z = np.asarray(z, dtype=complex)
    zeros = [complex(a) for a in zeros]
    if not zeros:
        return np.full(z.shape, complex(prefactor))[()] if z.shape else complex(prefactor)
    factors = np.stack([np.asarray(blaschke_factor(a, z)) for a in zeros])
    out = prefactor * _product(factors, axis=0)
    return out[()] if out.shape == () else out


@dataclass(frozen=True)
class DiscSequence:
    """Ordered finite list of distinct points of the open unit disc.

    The sequence is immutable; :meth:`append`, :meth:`without` and
    slicing return new sequences so the cached diagnostics stay consistent.
    """

    points: tuple

    def __post_init__(self):
        pts = tuple(as_disc_point(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        for i in range(len(pts)):
            for j in range(i):
                if pseudohyperbolic(pts[i], pts[j]) <= DUPLICATE_TOL:
                    raise DuplicatePoint(
                        f"points {j} and {i} coincide ({pts[j]!r}, {pts[i]!r})")

    def __len__(self):
        return len(self.points)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return DiscSequence(self.points[idx])
        return self.points[idx]

    def __iter__(self):
        return iter(self.points)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def append(self, point) -> "DiscSequence":
        return DiscSequence(self.points + (as_disc_point(point),))

    def without(self, index: int) -> "DiscSequence":
        return DiscSequence(self.points[:index] + self.points[index + 1:])

    @cached_property
    def blaschke_sum(self) -> float:
        return float(sum(1.0 - abs(p) for p in self.points))

    @cached_property
    def thinness_profile(self) -> list:
        return thinness_profile(self)

    @cached_property
    def carleson_constant(self) -> float:
        return carleson_constant(self)

    def contains(self, z, tol: float = DUPLICATE_TOL) -> bool:
        return any(pseudohyperbolic(z, p) <= tol for p in self.points)

    # serialization ----------------------------------------------------
    def to_json(self) -> list:
        return [[p.real, p.imag] for p in self.points]

    @classmethod
    def from_json(cls, data) -> "DiscSequence":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(complex(re, im) for re, im in data))


def blaschke_partial(seq: DiscSequence, k: int, n: int, z):
    """B_{k,n}(z), the product of Blaschke factors over seq[k..n] inclusive.

    ``k == n + 1`` encodes the empty product (identically 1).
    """
    if k < 0 or k > n + 1:
        raise ValueError(f"invalid range k={k}, n={n}")
    return blaschke_product(seq.points[k:n + 1], z)


def _separation_products(points: Sequence[complex]) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        raise ValueError("sequence is empty")
    rho = np.abs((pts[:, None] - pts[None, :]) / (1.0 - np.conj(pts)[:, None] * pts[None, :]))
    np.fill_diagonal(rho, 1.0)
    if len(pts) > LOG_PRODUCT_THRESHOLD:
        with np.errstate(divide="ignore"):
            return np.exp(np.sum(np.log(rho), axis=0))
    return np.prod(rho, axis=0)


def thinness_profile(seq: DiscSequence) -> list:
    """d_n = prod_{m != n} rho(lambda_m, lambda_n) for every n."""
    return [float(v) for v in _separation_products(seq.points)]


def carleson_constant(seq: DiscSequence) -> float:
    """min_n d_n, the finite-sequence Carleson (uniform separation) constant."""
    return float(np.min(_separation_products(seq.points)))


def generate_sequence(kind: str, n: int, **params):
    """Deterministic sequence generators used by the experiment drivers.

    kind='geometric'
        lambda_k = (1 - c r^k) e^{i angle}; params ``c`` (0.5), ``r`` (0.5),
        ``angle`` (0).
    kind='thin'
        radii 1 - c q^{k(k+1)/2} (superexponentially shrinking gaps) placed
        on a golden-angle spiral; params ``c`` (0.3), ``q`` (0.5),
        ``rotation`` (golden angle).
    kind='paired_vanishing'
        returns ``(Lambda, M)``.  Lambda is geometric (params ``c`` 0.5,
        ``r`` 0.1, ``angle`` 0) and mu_k sits at pseudohyperbolic distance
        delta_k = delta0 * s^k from lambda_k in direction ``direction``
        (params ``delta0`` 0.3, ``s`` 0.5, ``direction`` pi/2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    if kind == "geometric":
        c = params.pop("c", 0.5)
        r = params.pop("r", 0.5)
        angle = params.pop("angle", 0.0)
        _no_extra(params)
        if not 0 < r < 1:
            raise ValueError("geometric ratio must lie in (0, 1)")
        if not 0 < c <= 1:
            raise ValueError("c must lie in (0, 1]")
        pts = (1.0 - c * r ** k) * np.exp(1j * angle)
        return DiscSequence(tuple(pts))
    if kind == "thin":
        c = params.pop("c", 0.3)
        q = params.pop("q", 0.5)
        rotation = params.pop("rotation", GOLDEN_ANGLE)
        _no_extra(params)
        if not (0 < q < 1 and 0 < c <= 1):
            raise ValueError("thin sequence needs 0 < q < 1 and 0 < c <= 1")
        radii = 1.0 - c * q ** (k * (k + 1) / 2.0)
        pts = radii * np.exp(1j * rotation * k)
        return DiscSequence(tuple(pts))
    if kind == "paired_vanishing":
        c = params.pop("c", 0.5)
        r = params.pop("r", 0.1)
        angle = params.pop("angle", 0.0)
        delta0 = params.pop("delta0", 0.3)
        s = params.pop("s", 0.5)
        direction = params.pop("direction", np.pi / 2)
        _no_extra(params)
        if not (0 < delta0 < 1 and 0 < s < 1):
            raise ValueError("need 0 < delta0 < 1 and 0 < s < 1")
        lam = generate_sequence("geometric", n, c=c, r=r, angle=angle)
        deltas = delta0 * s ** k
        # mu = tau_{-lambda}(delta e^{i dir}) has rho(mu, lambda) = delta exactly
        mus = [moebius(-l, d * np.exp(1j * (direction + angle)))
               for l, d in zip(lam.points, deltas)]
        return lam, DiscSequence(tuple(mus))
    raise ValueError(f"unknown sequence kind {kind!r}")


def _no_extra(params):
    if params:
        raise ValueError(f"unexpected generator parameters: {sorted(params)}")
