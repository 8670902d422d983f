"""Optimistic Follow-the-Perturbed-Leader for convex losses.

The learner keeps the running sum of observed gradients and predicts the
average of ``m`` perturbed linear-oracle minimizers

    x_t = (1/m) sum_j argmin_x <sum_{i<t} grad_i + g_t - sigma_{t,j}, x>

where ``g_t`` is a guess of the next gradient. A zero guess is plain FTPL.
The learner never evaluates losses; the environment pushes gradients through
:meth:`ConvexOFTPL.update`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from . import perturbations as prt
from ._parallel import map_rows
from .domains import FeasibleSet


class Guess(str, Enum):
    ZERO = "zero"
    LAST_GRADIENT = "last_gradient"
    EXACT = "exact"
    EXTERNAL = "external"


@dataclass(frozen=True)
class LossOracle:
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz_G: float = math.inf
    smooth_L: float = math.inf
    holder_alpha: float = 1.0

    @property
    def is_linear(self) -> bool:
        return self.smooth_L == 0


def linear_loss(g) -> LossOracle:
    g = np.asarray(g, dtype=float).copy()
    return LossOracle(
        value=lambda x: float(g @ x),
        gradient=lambda x: g,
        lipschitz_G=float(np.linalg.norm(g)),
        smooth_L=0.0,
    )


def quadratic_loss(z, weight: float = 1.0, G: float = math.inf) -> LossOracle:
    """``weight/2 * ||x - z||^2``."""
    z = np.asarray(z, dtype=float).copy()
    return LossOracle(
        value=lambda x: 0.5 * weight * float((x - z) @ (x - z)),
        gradient=lambda x: weight * (np.asarray(x, dtype=float) - z),
        lipschitz_G=G,
        smooth_L=float(weight),
    )


@dataclass
class ConvexOFTPL:
    """State of one convex OFTPL learner (cumulative gradient, round counter)."""

    fset: FeasibleSet
    spec: prt.PerturbationSpec
    m: int = 1
    cum_grad: np.ndarray | None = None
    t: int = 1
    oracle_calls: int = 0
    workers: int = 1
    last_grad: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.spec.dim != self.fset.dim:
            raise ValueError("perturbation and set dimensions differ")
        if self.cum_grad is None:
            self.cum_grad = np.zeros(self.fset.dim)
        else:
            self.cum_grad = np.asarray(self.cum_grad, dtype=float).copy()
            if self.cum_grad.shape != (self.fset.dim,):
                raise ValueError("cum_grad dimension does not match the set")

    @property
    def dim(self) -> int:
        return self.fset.dim

    def minimizers(self, guess, sigma: np.ndarray) -> np.ndarray:
        """Per-sample minimizers for explicit perturbations ``sigma`` (``(m, d)``)."""
        guess = np.zeros(self.dim) if guess is None else np.asarray(guess, dtype=float)
        if guess.shape != (self.dim,):
            raise ValueError("guess dimension does not match the set")
        sigma = np.atleast_2d(sigma)
        base = self.cum_grad + guess
        xs = map_rows(lambda s: self.fset.lmo(base - s), sigma, self.workers)
        self.oracle_calls += len(sigma)
        return xs

    def step(self, guess, stream: prt.RngStream) -> tuple[np.ndarray, np.ndarray]:
        """One prediction: returns the averaged play and the ``m`` raw minimizers."""
        sigma = prt.sample(self.spec, stream, size=self.m)
        xs = self.minimizers(guess, sigma)
        return xs.mean(axis=0), xs

    def tilde(self, stream: prt.RngStream) -> np.ndarray:
        """Prediction this round would make with a zero guess."""
        return self.step(None, stream)[0]

    def update(self, grad) -> "ConvexOFTPL":
        grad = np.asarray(grad, dtype=float)
        if grad.shape != (self.dim,):
            raise ValueError("gradient dimension does not match the set")
        if not np.all(np.isfinite(grad)):
            raise ValueError("non-finite gradient")
        self.cum_grad = self.cum_grad + grad
        self.last_grad = grad
        self.t += 1
        return self


def oftpl_step(state: ConvexOFTPL, guess, stream: prt.RngStream):
    return state.step(guess, stream)


def tilde_prediction(state: ConvexOFTPL, stream: prt.RngStream) -> np.ndarray:
    return state.tilde(stream)


def update(state: ConvexOFTPL, grad_t) -> ConvexOFTPL:
    return state.update(grad_t)


@dataclass
class OnlineRun:
    plays: np.ndarray
    losses: np.ndarray
    gradients: np.ndarray
    oracle_calls: int


def play(
    learner: ConvexOFTPL,
    losses: Sequence[LossOracle],
    guess: Guess | str = Guess.ZERO,
    seed: int = 0,
    external: Iterable[np.ndarray] | None = None,
    lane: tuple = (0,),
) -> OnlineRun:
    """Run the online protocol against a fixed loss sequence.

    ``Guess.EXACT`` uses the gradient of the upcoming loss at the previous
    play (exact for linear losses); ``Guess.EXTERNAL`` reads guesses from
    ``external``.
    """
    guess = Guess(guess)
    ext = iter(external) if external is not None else None
    root = prt.RngStream(seed, lane)
    plays, vals, grads = [], [], []
    prev = learner.fset.lmo(np.zeros(learner.dim))
    for f in losses:
        t = learner.t
        if guess is Guess.ZERO:
            g = None
        elif guess is Guess.LAST_GRADIENT:
            g = learner.last_grad
        elif guess is Guess.EXACT:
            g = f.gradient(prev)
        else:
            g = next(ext)
        x, _ = learner.step(g, root.child(t, "play"))
        grad = f.gradient(x)
        plays.append(x)
        vals.append(f.value(x))
        grads.append(grad)
        learner.update(grad)
        prev = x
    return OnlineRun(np.array(plays), np.array(vals), np.array(grads), learner.oracle_calls)


def regret_bound_convex(eta, D, d, G, L, alpha, T, m, psi1=1.0, psi2=1.0) -> float:
    """FTPL regret bound with uniform-ball perturbations (stability constant dD)."""
    sampling = L * T * (psi1 * psi2 * D / math.sqrt(m)) ** (1 + alpha) if L else 0.0
    return eta * D + d * D * G * G * T / (2.0 * eta) + sampling


def tuned_eta(d, G, T) -> float:
    """eta minimising ``eta*D + d*D*G^2*T/(2*eta)`` (independent of D)."""
    return G * math.sqrt(d * T / 2.0)
