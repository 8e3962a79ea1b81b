"""Schur-class functions as evaluable expression trees and the Schur recursion.

A :class:`SchurFn` is an immutable tree of nodes (constants, Blaschke
products, atomic singular factors, products, Moebius compositions and the
raise/lower steps of the Schur recursion).  Trees evaluate vectorized over
numpy arrays and serialize losslessly to JSON.

The forward recursion peels the function at the nodes of a sequence,

    theta_0 = theta,  gamma_n = theta_n(lambda_n),
    theta_{n+1} = tau_{gamma_n}(theta_n) / tau_{lambda_n},

and the inverse processes rebuild functions from prescribed coefficients
by iterating w -> tau_{-gamma_k}(tau_{lambda_k} w) outward from a seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .disc import DiscSequence, as_disc_point, blaschke_product, moebius
from .errors import (AtomTooClose, EvaluationError, NodeCoincidesWithSingularity,
                     SingularityTooClose, TerminatedRecursion)

TOL_UNIMODULAR = 1e-9
EPS_SING = 1e-6
RHO_SING = 1e-3
ATOM_TOL = 1e-9
_CIRCLE = np.exp(2j * np.pi * np.arange(8) / 8)


def _c2j(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _j2c(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


class SchurFn:
    """Base class of expression-tree nodes.

    Calling a node evaluates it: ``f(z)`` accepts a scalar or an array.
    """

    kind = "abstract"

    def __call__(self, z):
        return evaluate(self, z)

    def _eval(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def children(self) -> tuple:
        return ()

    def atoms(self) -> list:
        """Boundary points carrying a singular atom anywhere in the tree."""
        out = []
        for c in self.children():
            out.extend(c.atoms())
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)

    def to_json(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True, eq=False)
class Constant(SchurFn):
    value: complex
    kind = "constant"

    def __post_init__(self):
        v = complex(self.value)
        if abs(v) > 1.0 + 1e-12:
            raise ValueError(f"constant {v!r} lies outside the closed unit disc")
        object.__setattr__(self, "value", v)

    def _eval(self, z):
        return np.full(z.shape, self.value, dtype=complex)

    def to_json(self):
        return {"kind": self.kind, "value": _c2j(self.value)}


@dataclass(frozen=True, eq=False)
class BlaschkeNode(SchurFn):
    """prefactor * prod_k b_{a_k}(z); zeros may repeat (z**2 is two zeros at 0)."""

    zeros: tuple
    prefactor: complex = 1.0
    kind = "blaschke"

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(as_disc_point(a) for a in self.zeros))
        p = complex(self.prefactor)
        if abs(abs(p) - 1.0) > 1e-12:
            raise ValueError("Blaschke prefactor must be unimodular")
        object.__setattr__(self, "prefactor", p)

    def _eval(self, z):
        return np.asarray(blaschke_product(self.zeros, z, self.prefactor), dtype=complex)

    def to_json(self):
        return {"kind": self.kind, "zeros": [_c2j(a) for a in self.zeros],
                "prefactor": _c2j(self.prefactor)}


@dataclass(frozen=True, eq=False)
class AtomicSingular(SchurFn):
    """exp(-a (1 + w)/(1 - w)) with w = z e^{-i rotation}: atom of mass a at e^{i rotation}."""

    a: float
    rotation: float = 0.0
    kind = "atomic"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("atomic mass must be positive")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "rotation", float(self.rotation))

    @property
    def atom(self) -> complex:
        return complex(np.exp(1j * self.rotation))

    def atoms(self):
        return [self.atom]

    def _eval(self, z):
        w = z * np.exp(-1j * self.rotation)
        if np.any(np.abs(w - 1.0) <= ATOM_TOL):
            raise AtomTooClose(f"evaluation within {ATOM_TOL} of the atom {self.atom!r}")
        return np.exp(-self.a * (1.0 + w) / (1.0 - w))

    def to_json(self):
        return {"kind": self.kind, "a": self.a, "rotation": self.rotation}


@dataclass(frozen=True, eq=False)
class Product(SchurFn):
    factors: tuple
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def children(self):
        return self.factors

    def _eval(self, z):
        out = np.ones(z.shape, dtype=complex)
        for f in self.factors:
            out = out * f._eval(z)
        return out

    def to_json(self):
        return {"kind": self.kind, "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class MoebiusCompose(SchurFn):
    """tau_gamma o child."""

    gamma: complex
    child: SchurFn
    kind = "moebius"

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_disc_point(self.gamma))

    def children(self):
        return (self.child,)

    def _eval(self, z):
        return moebius(self.gamma, self.child._eval(z))

    def to_json(self):
        return {"kind": self.kind, "gamma": _c2j(self.gamma), "child": self.child.to_json()}


@dataclass(frozen=True, eq=False)
class RaiseStep(SchurFn):
    """tau_{-gamma}(tau_lambda * child): one step of the inverse recursion."""

    gamma: complex
    lam: complex
    child: SchurFn
    kind = "raise"

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_disc_point(self.gamma))
        object.__setattr__(self, "lam", as_disc_point(self.lam))

    def children(self):
        return (self.child,)

    def _eval(self, z):
        w = moebius(self.lam, z) * self.child._eval(z)
        return (w + self.gamma) / (1.0 + np.conj(self.gamma) * w)

    def to_json(self):
        return {"kind": self.kind, "gamma": _c2j(self.gamma), "lambda": _c2j(self.lam),
                "child": self.child.to_json()}


@dataclass(frozen=True, eq=False)
class LowerStep(SchurFn):
    """tau_gamma(child) / tau_lambda, with a removable singularity at lambda.

    Near ``lam`` (pseudohyperbolically) the value is replaced by the mean
    over eight points of a circle of radius ``RHO_SING`` in the coordinate
    w = tau_lambda(z), which keeps the ring inside the disc even when
    ``lam`` is close to the boundary.  The error is O(RHO_SING**8).
    """

    gamma: complex
    lam: complex
    child: SchurFn
    check: bool = field(default=True, compare=False, repr=False)
    kind = "lower"

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "lam", as_disc_point(self.lam))
        if abs(self.gamma) >= 1.0:
            raise ValueError("LowerStep needs |gamma| < 1")
        if self.check:
            at = complex(self.child(self.lam))
            if abs(at - self.gamma) > 1e-10:
                raise ValueError(
                    f"child({self.lam!r}) = {at!r} differs from gamma = {self.gamma!r}")

    def children(self):
        return (self.child,)

    def _direct(self, z):
        return moebius(self.gamma, self.child._eval(z)) / moebius(self.lam, z)

    def _eval(self, z):
        near = np.abs(moebius(self.lam, z)) < EPS_SING
        if not np.any(near):
            return self._direct(z)
        out = np.empty(z.shape, dtype=complex)
        if np.any(~near):
            out[~near] = self._direct(z[~near])
        zn = z[near]
        ring = moebius(-self.lam, moebius(self.lam, zn)[:, None] + RHO_SING * _CIRCLE[None, :])
        if np.any(np.abs(ring) >= 1.0):
            raise SingularityTooClose(
                f"removable singularity at {self.lam!r} is too close to the boundary")
        out[near] = self._direct(ring).mean(axis=1)
        return out

    def to_json(self):
        return {"kind": self.kind, "gamma": _c2j(self.gamma), "lambda": _c2j(self.lam),
                "child": self.child.to_json()}


def evaluate(f: SchurFn, z):
    """Evaluate ``f`` at a scalar or array ``z`` with |z| <= 1."""
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) > 1.0 + 1e-14):
        raise EvaluationError("evaluation point outside the closed unit disc")
    out = f._eval(np.atleast_1d(arr))
    if arr.ndim == 0:
        return complex(out[0])
    return out.reshape(arr.shape)


def from_json(data) -> SchurFn:
    """Rebuild a tree from :meth:`SchurFn.to_json` output (dict or JSON string)."""
    if isinstance(data, str):
        data = json.loads(data)
    kind = data["kind"]
    if kind == "constant":
        return Constant(_j2c(data["value"]))
    if kind == "blaschke":
        return BlaschkeNode(tuple(_j2c(a) for a in data["zeros"]),
                            _j2c(data.get("prefactor", [1.0, 0.0])))
    if kind == "atomic":
        return AtomicSingular(data["a"], data.get("rotation", 0.0))
    if kind == "product":
        return Product(tuple(from_json(f) for f in data["factors"]))
    if kind == "moebius":
        return MoebiusCompose(_j2c(data["gamma"]), from_json(data["child"]))
    if kind == "raise":
        return RaiseStep(_j2c(data["gamma"]), _j2c(data["lambda"]), from_json(data["child"]))
    if kind == "lower":
        # already validated when first built; the check would only re-evaluate
        return LowerStep(_j2c(data["gamma"]), _j2c(data["lambda"]), from_json(data["child"]),
                         check=False)
    raise ValueError(f"unknown node kind {kind!r}")


def monomial(k: int) -> SchurFn:
    """z**k as a Blaschke node with a k-fold zero at the origin."""
    if k == 0:
        return Constant(1.0)
    return BlaschkeNode((0j,) * k)


# ---------------------------------------------------------------------------
# coefficient sequences


@dataclass(frozen=True)
class ParamSeq:
    """Schur coefficients gamma_0, gamma_1, ... with termination status.

    ``terminated_at`` is ``None`` while the recursion is running; otherwise
    it is the step n at which |theta_n| reached 1 and ``terminal_value`` is
    the unimodular value observed there.
    """

    gammas: tuple
    terminated_at: int | None = None
    terminal_value: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(complex(g) for g in self.gammas))
        for g in self.gammas:
            if abs(g) >= 1.0 - TOL_UNIMODULAR:
                raise ValueError(f"stored coefficient {g!r} is (numerically) unimodular")

    def __len__(self):
        return len(self.gammas)

    def __getitem__(self, k):
        return self.gammas[k]

    @property
    def status(self) -> str:
        return "running" if self.terminated_at is None else "terminated_unimodular"

    @property
    def terminated(self) -> bool:
        return self.terminated_at is not None

    def to_json(self) -> dict:
        status = {"kind": self.status}
        if self.terminated:
            status.update(at=self.terminated_at, value=_c2j(self.terminal_value))
        return {"gammas": [_c2j(g) for g in self.gammas], "status": status}

    @classmethod
    def from_json(cls, data) -> "ParamSeq":
        if isinstance(data, str):
            data = json.loads(data)
        st = data.get("status", {"kind": "running"})
        if st["kind"] == "running":
            return cls(tuple(_j2c(g) for g in data["gammas"]))
        return cls(tuple(_j2c(g) for g in data["gammas"]), st["at"], _j2c(st["value"]))


def schur_forward(theta: SchurFn, seq: DiscSequence, n: int):
    """Run the forward Schur recursion to depth ``n``.

    Returns ``(params, thetas)`` where ``params`` holds gamma_0..gamma_{n-1}
    and ``thetas`` holds theta_0..theta_n.  If some |theta_k| reaches
    1 - TOL_UNIMODULAR the run stops there (theta was numerically a finite
    Blaschke product of degree k) and ``thetas`` ends with that unimodular
    constant.  Termination at the last step is detected by probing
    theta_n at lambda_n, or at the origin when the sequence is exhausted.
    """
    if n > len(seq):
        raise ValueError(f"depth {n} exceeds sequence length {len(seq)}")
    thetas = [theta]
    gammas = []
    for k in range(n + 1):
        probe = seq[k] if k < len(seq) else 0j
        try:
            value = complex(thetas[k](probe))
        except SingularityTooClose as exc:
            raise NodeCoincidesWithSingularity(str(exc)) from exc
        if abs(value) >= 1.0 - TOL_UNIMODULAR:
            return ParamSeq(tuple(gammas), k, value), thetas
        if k == n:
            break
        gammas.append(value)
        thetas.append(LowerStep(value, seq[k], thetas[k], check=False))
    return ParamSeq(tuple(gammas)), thetas


def schur_values(thetas: Sequence[SchurFn], params: ParamSeq, seq: DiscSequence, z, upto=None):
    """theta_0(z), ..., theta_upto(z) by iterating the recursion pointwise.

    Equivalent to evaluating each tree but linear in depth; falls back to the
    tree (and its circle-mean rule) when ``z`` sits on a removable singularity.
    """
    upto = len(thetas) - 1 if upto is None else upto
    z = complex(z)
    vals = [complex(thetas[0](z))]
    for k in range(1, upto + 1):
        lam = seq[k - 1]
        if abs(z - lam) < EPS_SING:
            vals.append(complex(thetas[k](z)))
        else:
            vals.append(complex(moebius(params[k - 1], vals[-1]) / moebius(lam, z)))
    return vals


def require_depth(params: ParamSeq, n: int):
    """Raise :class:`TerminatedRecursion` if the recursion stopped before step n."""
    if params.terminated and params.terminated_at < n:
        raise TerminatedRecursion(
            f"recursion terminated at step {params.terminated_at} < {n}", params.terminated_at)
    if len(params) < n:
        raise TerminatedRecursion(f"only {len(params)} coefficients available, need {n}")


def summability_check(params, tail_tol: float = 1e-8):
    """Partial sums of |gamma_n| and a heuristic convergence flag.

    The flag is true when every increment in the last quartile is below
    ``tail_tol``.
    """
    g = params.gammas if isinstance(params, ParamSeq) else params
    mods = np.abs(np.asarray(g, dtype=complex))
    sums = np.cumsum(mods)
    if mods.size == 0:
        return [], True
    start = (3 * mods.size) // 4
    flag = bool(np.all(mods[start:] < tail_tol)) if start < mods.size else True
    return [float(s) for s in sums], flag


# ---------------------------------------------------------------------------
# inverse processes


def _gammas_of(gamma) -> tuple:
    return gamma.gammas if isinstance(gamma, ParamSeq) else tuple(complex(g) for g in gamma)


def _raise_chain(seed: SchurFn, gammas, seq: DiscSequence, n: int) -> SchurFn:
    h = seed
    for k in range(1, n + 1):
        h = RaiseStep(gammas[n - k], seq[n - k], h)
    return h


def inverse_process_I(gamma, seq: DiscSequence, n: int) -> SchurFn:
    """h_{n,n} from the seed h_{n,0} = gamma_n.

    The result has Schur coefficients gamma_0..gamma_n at lambda_0..lambda_n.
    """
    g = _gammas_of(gamma)
    if n >= len(g):
        raise ValueError(f"process I at depth {n} needs {n + 1} coefficients")
    if any(abs(x) >= 1 for x in g[:n + 1]):
        raise ValueError("process I needs |gamma_k| < 1")
    return _raise_chain(Constant(g[n]), g, seq, n)


def inverse_process_II(theta: SchurFn, seq: DiscSequence, mu, n: int) -> SchurFn:
    """h_{mu;n,n} seeded with theta_n(mu) and raised with theta's own coefficients."""
    mu = as_disc_point(mu)
    if seq[:n].contains(mu):
        raise ValueError("mu must not be a node of the sequence")
    params, thetas = schur_forward(theta, seq, n)
    require_depth(params, n)
    seed = complex(schur_values(thetas, params, seq, mu, n)[n])
    if abs(seed) > 1.0:
        seed /= abs(seed)
    return _raise_chain(Constant(seed), params.gammas, seq, n)


def inverse_process_III(gamma, seq: DiscSequence, n: int) -> SchurFn:
    """h_{n,n} from the seed 1: a degree-n Blaschke product times a unimodular constant."""
    g = _gammas_of(gamma)
    if n > len(g):
        raise ValueError(f"process III at depth {n} needs {n} coefficients")
    return _raise_chain(Constant(1.0), g, seq, n)


def roundtrip_check(h: SchurFn, seq: DiscSequence, gamma, n: int) -> float:
    """max_k |recovered gamma_k - prescribed gamma_k| over k < n.

    Returns ``inf`` if the forward recursion of ``h`` terminates early.
    """
    g = _gammas_of(gamma)
    if n == 0:
        return 0.0
    params, _ = schur_forward(h, seq, n)
    if len(params) < n:
        return float("inf")
    return float(max(abs(params[k] - g[k]) for k in range(n)))


def boundary_floor(gamma) -> float:
    """(1 - |gamma_n|^2) prod_{k<n} (1 - |gamma_k|^2) / (1 + |gamma_k|)^2."""
    g = np.abs(np.asarray(_gammas_of(gamma), dtype=complex))
    if g.size == 0:
        return 1.0
    head = g[:-1]
    return float((1 - g[-1] ** 2) * np.prod((1 - head ** 2) / (1 + head) ** 2))


def boundary_floor_check(h: SchurFn, gamma, m: int = 512):
    """(min over m boundary samples of 1 - |h|^2, closed-form floor)."""
    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    emp = float(np.min(1.0 - np.abs(h(zeta)) ** 2))
    return emp, boundary_floor(gamma)


def boundary_modulus(h: SchurFn, m: int = 512) -> np.ndarray:
    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    return np.abs(h(zeta))


def membership_ratio(h: SchurFn, theta: SchurFn, zeros, radius: float = 0.99, m: int = 256) -> float:
    """max over |z| = radius of |h - theta| / |prod b_a|, zeros a given.

    Bounded ratios are the numerical face of h in theta + B H^inf.
    """
    z = radius * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    den = np.abs(blaschke_product(zeros, z))
    return float(np.max(np.abs(h(z) - theta(z)) / den))


def cauchy_sequence_probe(builder: Callable[[int], SchurFn], radii, n_max: int, m: int = 64) -> dict:
    """sup over m points of |h_n - h_{n-1}| on circles |z| = r, for n = 1..n_max.

    Returns ``{r: [diff_1, ..., diff_{n_max}]}``.
    """
    table = {}
    for r in radii:
        z = r * np.exp(2j * np.pi * np.arange(m) / m)
        prev = builder(0)(z)
        diffs = []
        for n in range(1, n_max + 1):
            cur = builder(n)(z)
            diffs.append(float(np.max(np.abs(cur - prev))))
            prev = cur
        table[float(r)] = diffs
    return table
