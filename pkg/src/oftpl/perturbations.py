"""Perturbation distributions and lane-keyed random streams.

A stream is identified by ``(master_seed, lane)``; the lane is a tuple such as
``(player, t, "play")``. The generator behind a stream is a Philox counter-based
bit generator keyed by hashing the seed together with the lane, so a draw never
depends on which worker asked for it or in what order lanes were opened.

Batch draws are row-major: row ``j`` of ``sample(spec, stream, size=m)`` is the
``j``-th perturbation of that lane.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .domains import FeasibleSet, Norm, diameter


class NoStabilityBoundError(NotImplementedError):
    pass


class Family(str, Enum):
    UNIFORM_BALL2 = "uniform_ball2"
    EXP_COORDINATE = "exp_coordinate"
    GAUSSIAN_ISO = "gaussian_iso"


@dataclass(frozen=True)
class PerturbationSpec:
    family: Family
    eta: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @classmethod
    def uniform_ball2(cls, eta: float, dim: int) -> "PerturbationSpec":
        return cls(Family.UNIFORM_BALL2, eta, dim)

    @classmethod
    def exp_coordinate(cls, eta: float, dim: int) -> "PerturbationSpec":
        return cls(Family.EXP_COORDINATE, eta, dim)

    @classmethod
    def gaussian_iso(cls, eta: float, dim: int) -> "PerturbationSpec":
        return cls(Family.GAUSSIAN_ISO, eta, dim)

    @property
    def radius(self) -> float:
        """Support radius of the uniform-ball family."""
        return (1.0 + 1.0 / self.dim) * self.eta

    @property
    def dual_norm(self) -> Norm:
        """Norm in which ``eta`` is the expected size of a draw."""
        return Norm.LINF if self.family is Family.EXP_COORDINATE else Norm.L2

    @property
    def primal_norm(self) -> Norm:
        return self.dual_norm.dual

    def with_eta(self, eta: float) -> "PerturbationSpec":
        return PerturbationSpec(self.family, eta, self.dim)


def _lane_word(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        return int(part)
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("lane integers must be non-negative")
        return int(part)
    digest = hashlib.blake2b(str(part).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    lane: tuple = ()

    def generator(self) -> np.random.Generator:
        key = tuple(_lane_word(p) for p in self.lane)
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *parts) -> "RngStream":
        return RngStream(self.master_seed, self.lane + tuple(parts))


def _draw(spec: PerturbationSpec, rng: np.random.Generator, m: int) -> np.ndarray:
    d = spec.dim
    if spec.family is Family.UNIFORM_BALL2:
        z = rng.standard_normal((m, d))
        z /= np.sqrt((z * z).sum(axis=1))[:, None]
        r = spec.radius * rng.random(m) ** (1.0 / d)
        return z * r[:, None]
    if spec.family is Family.EXP_COORDINATE:
        return rng.exponential(spec.eta, size=(m, d))
    return spec.eta * rng.standard_normal((m, d))


def sample(spec: PerturbationSpec, stream: RngStream, size: int | None = None) -> np.ndarray:
    """Draw from ``spec`` on ``stream``; one vector, or ``size`` rows."""
    out = _draw(spec, stream.generator(), 1 if size is None else int(size))
    return out[0] if size is None else out


def harmonic(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def expected_dual_norm(spec: PerturbationSpec) -> float:
    """E||sigma||_* for the family's natural dual norm.

    For exponential coordinates this is eta times the harmonic number H_d,
    which is the exact mean of the max of d Exp(eta) draws.
    """
    if spec.family is Family.UNIFORM_BALL2:
        return spec.eta
    if spec.family is Family.EXP_COORDINATE:
        return spec.eta * harmonic(spec.dim)
    d = spec.dim
    return spec.eta * math.sqrt(2.0) * math.exp(gammaln((d + 1) / 2) - gammaln(d / 2))


def stability_bound(spec: PerturbationSpec, fset: FeasibleSet) -> float:
    """Analytic stability constant (C / eta) of the expected perturbed leader."""
    if fset.dim != spec.dim:
        raise ValueError("perturbation and set dimensions differ")
    d = spec.dim
    if spec.family is Family.UNIFORM_BALL2:
        return d * diameter(fset, Norm.L2) / spec.eta
    if spec.family is Family.EXP_COORDINATE:
        return 125.0 * d * d * diameter(fset, Norm.L1) / spec.eta
    raise NoStabilityBoundError("no analytic stability bound for Gaussian perturbations")


def stability_constant(spec: PerturbationSpec, fset: FeasibleSet) -> float:
    """The set-dependent constant C with stability = C / eta."""
    return stability_bound(spec, fset) * spec.eta


def from_record(rec: dict, dim: int, eta: float | None = None) -> PerturbationSpec:
    fam = Family(rec["type"])
    value = eta if eta is not None else rec.get("eta")
    if value is None:
        raise ValueError("perturbation record has no eta")
    return PerturbationSpec(fam, float(value), dim)
