"""Experiment configuration: a single JSON document validated with pydantic.

Unknown fields are rejected everywhere.  Complex numbers are written as
``[re, im]`` pairs.  The only implicit defaults are the grid size (4096),
the seed (0) and the per-command knobs documented on each model.
"""
from __future__ import annotations

import json
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .disc import DiscSequence, generate_sequence
from .oracle import DEFAULT_N
from .schur import (AtomicSingular, BlaschkeNode, Constant, SchurFn, from_json,
                    inverse_process_I, inverse_process_III)

Pair = tuple[float, float]
COMMANDS = ("schur-forward", "inverse", "distance-compare", "riesz-diagnose", "hankel")


class ConfigError(ValueError):
    """Raised for any invalid configuration (CLI exit code 2)."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _c(p) -> complex:
    return complex(p[0], p[1])


class SequenceSpec(_Strict):
    points: Optional[list[Pair]] = None
    generator: Optional[Literal["geometric", "thin"]] = None
    n: Optional[int] = Field(default=None, ge=1)
    params: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.points is None) == (self.generator is None):
            raise ValueError("give exactly one of 'points' or 'generator'")
        if self.generator is not None and self.n is None:
            raise ValueError("a generator needs 'n'")
        return self

    def build(self) -> DiscSequence:
        if self.points is not None:
            return DiscSequence(tuple(_c(p) for p in self.points))
        return generate_sequence(self.generator, self.n, **dict(self.params))


class ConstantTheta(_Strict):
    kind: Literal["constant"]
    value: Pair


class BlaschkeTheta(_Strict):
    kind: Literal["blaschke"]
    zeros: list[Pair]
    prefactor: Pair = (1.0, 0.0)


class SequenceBlaschkeTheta(_Strict):
    """B_Lambda on the configured sequence."""
    kind: Literal["sequence_blaschke"]


class AtomicTheta(_Strict):
    kind: Literal["atomic"]
    a: float = Field(gt=0)
    rotation: float = 0.0


class TreeTheta(_Strict):
    kind: Literal["tree"]
    tree: dict


class ProcessTheta(_Strict):
    """Process I uses gamma_0..gamma_n (n+1 values), process III gamma_0..gamma_{n-1}."""
    kind: Literal["process_I", "process_III"]
    gammas: list[Pair] = Field(min_length=1)


class RandomBlaschkeTheta(_Strict):
    kind: Literal["random_blaschke"]
    degree: int = Field(ge=1, le=64)
    max_modulus: float = Field(default=0.9, gt=0, lt=1)


ThetaSpec = Annotated[
    Union[ConstantTheta, BlaschkeTheta, SequenceBlaschkeTheta, AtomicTheta, TreeTheta,
          ProcessTheta, RandomBlaschkeTheta],
    Field(discriminator="kind"),
]


class InverseSpec(_Strict):
    process: Literal["I", "II", "III"]
    gammas: list[Pair] = Field(default_factory=list)
    depth: Optional[int] = Field(default=None, ge=0)
    cauchy_radii: list[float] = Field(default_factory=lambda: [0.5, 0.9])
    boundary_samples: int = Field(default=512, ge=8)


class PairSpec(_Strict):
    n: int = Field(default=8, ge=1)
    params: dict[str, float] = Field(default_factory=dict)


class HankelSpec(_Strict):
    sizes: list[int] = Field(default_factory=lambda: [16, 32, 64, 128])
    k_max: int = Field(default=16, ge=1)
    route: Literal["grid", "exact"] = "grid"
    pair: Optional[PairSpec] = None

    @model_validator(mode="after")
    def _sizes(self):
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be non-empty and increasing")
        if self.sizes[0] < 1:
            raise ValueError("sizes must be positive")
        return self


class RieszSpec(_Strict):
    family: Literal["kernels", "mw_projection"] = "kernels"
    normalized: bool = True
    aos: Optional[list[int]] = None


class ExperimentConfig(_Strict):
    command: Optional[Literal[COMMANDS]] = None
    sequence: SequenceSpec
    theta: Optional[ThetaSpec] = None
    mu: list[Pair] = Field(default_factory=list)
    random_mu: int = Field(default=0, ge=0)
    depth: Optional[int] = Field(default=None, ge=0)
    grid: int = Field(default=DEFAULT_N, ge=256)
    seed: int = 0
    oracle: bool = True
    inverse: Optional[InverseSpec] = None
    hankel: Optional[HankelSpec] = None
    riesz: Optional[RieszSpec] = None

    @model_validator(mode="after")
    def _command_blocks(self):
        if self.command == "inverse" and self.inverse is None:
            raise ValueError("command 'inverse' needs an 'inverse' block")
        if self.command in ("schur-forward", "distance-compare", "riesz-diagnose") and self.theta is None:
            raise ValueError(f"command {self.command!r} needs a 'theta' block")
        if self.command == "hankel" and self.theta is None and (self.hankel is None or self.hankel.pair is None):
            raise ValueError("command 'hankel' needs 'theta' or 'hankel.pair'")
        return self

    # builders -------------------------------------------------------------
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def build_sequence(self) -> DiscSequence:
        return self.sequence.build()

    def build_theta(self, seq: DiscSequence, rng: np.random.Generator | None = None) -> SchurFn:
        t = self.theta
        if t is None:
            raise ConfigError("no theta configured")
        if t.kind == "constant":
            return Constant(_c(t.value))
        if t.kind == "blaschke":
            return BlaschkeNode(tuple(_c(z) for z in t.zeros), _c(t.prefactor))
        if t.kind == "sequence_blaschke":
            return BlaschkeNode(seq.points)
        if t.kind == "atomic":
            return AtomicSingular(t.a, t.rotation)
        if t.kind == "tree":
            return from_json(t.tree)
        if t.kind == "process_I":
            g = [_c(x) for x in t.gammas]
            return inverse_process_I(g, seq, len(g) - 1)
        if t.kind == "process_III":
            g = [_c(x) for x in t.gammas]
            return inverse_process_III(g, seq, len(g))
        rng = rng if rng is not None else self.rng()
        return random_blaschke(rng, t.degree, t.max_modulus)

    def build_mu(self, seq: DiscSequence, rng: np.random.Generator | None = None) -> list:
        pts = [_c(p) for p in self.mu]
        if self.random_mu:
            rng = rng if rng is not None else self.rng()
            while len(pts) < len(self.mu) + self.random_mu:
                z = random_disc_point(rng, 0.9)
                if not seq.contains(z, 1e-3):
                    pts.append(z)
        for z in pts:
            if abs(z) >= 1:
                raise ConfigError(f"mu {z!r} is not in the unit disc")
        return pts


def random_disc_point(rng: np.random.Generator, max_modulus: float) -> complex:
    r = max_modulus * np.sqrt(rng.uniform())
    return complex(r * np.exp(2j * np.pi * rng.uniform()))


def random_blaschke(rng: np.random.Generator, degree: int, max_modulus: float = 0.9) -> BlaschkeNode:
    return BlaschkeNode(tuple(random_disc_point(rng, max_modulus) for _ in range(degree)))


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config; every failure becomes :class:`ConfigError`."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


def parse_config(raw) -> ExperimentConfig:
    from pydantic import ValidationError

    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        lines = [f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines)) from exc
