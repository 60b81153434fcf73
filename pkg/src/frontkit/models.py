"""Reaction systems under study and their equilibrium structure.

The main model is the n-species competition system with distributed delays,

    du_i/dt = d_i Lap(u_i) + r_i u_i(t) [1 - sum_j c_ij <u_j>_ij],

where <u_j>_ij is the history of species j averaged against the delay
kernel eta_ij.  Two scalar delayed equations from the population-dynamics
literature ship alongside it: a logistic equation with delayed growth
(u(t-tau)[1 - u(t)]) and a blowfly-type equation -u(t) + e^2 u(t-tau)
e^{-u(t-tau)}.

Histories are passed around as evaluable functions h(s) -> values (shape
(n,) or (n, m) for m space points), so the same reaction code serves the
wave operator (shifted profiles) and the PDE simulator (time-history
buffers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernels import DelayKernel

__all__ = [
    "LotkaVolterraModel",
    "ZouModel",
    "NicholsonModel",
    "EquilibriumSet",
    "ModelError",
    "NoEquilibriumError",
    "reaction_eval",
    "positive_equilibrium",
    "weak_coupling_check",
    "lipschitz_beta",
    "audit_beta",
    "nicholson_f",
    "nicholson_square",
]

History = Callable[[float], np.ndarray]


class ModelError(ValueError):
    pass


class NoEquilibriumError(ModelError):
    """Interaction matrix singular or coexistence state nonpositive."""


@dataclass(frozen=True)
class LotkaVolterraModel:
    """Competition system with per-pair delay kernels.

    d, r: per-species diffusion and intrinsic rates (> 0).
    c: interaction matrix, c_ii > 0, c_ij >= 0.
    kernels: n x n matrix of DelayKernel (mass 1 each).
    a_i is the weight of kernel (i, i) at s = 0; solver paths that rely on
    instantaneous self-limitation require a_i > 0.
    """

    d: tuple[float, ...]
    r: tuple[float, ...]
    c: tuple[tuple[float, ...], ...]
    kernels: tuple[tuple[DelayKernel, ...], ...]
    name: str = "lotka_volterra"

    def __post_init__(self):
        n = self.n
        if len(self.r) != n or len(self.c) != n or len(self.kernels) != n:
            raise ModelError("d, r, c, kernels must all have matching species count")
        if any(di <= 0 for di in self.d):
            raise ModelError("diffusion coefficients must be positive")
        if any(ri <= 0 for ri in self.r):
            raise ModelError("intrinsic rates must be positive")
        for i in range(n):
            if len(self.c[i]) != n or len(self.kernels[i]) != n:
                raise ModelError("c and kernels must be square")
            if self.c[i][i] <= 0:
                raise ModelError(f"c[{i}][{i}] must be positive")
            if any(cij < 0 for cij in self.c[i]):
                raise ModelError("interaction coefficients must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def kind(self) -> str:
        return self.name

    @property
    def tau(self) -> float:
        return max(k.tau for row in self.kernels for k in row)

    @property
    def a(self) -> np.ndarray:
        """Instantaneous self-limitation weights a_i (diagonal mass at s = 0)."""
        return np.array([self.kernels[i][i].diagonal_split()[0] for i in range(self.n)])

    @property
    def carrying_caps(self) -> np.ndarray:
        """Saturation levels (a_i c_ii)^{-1}; infinite when a_i = 0."""
        a = self.a
        caps = np.empty(self.n)
        for i in range(self.n):
            caps[i] = math.inf if a[i] == 0 else 1.0 / (a[i] * self.c[i][i])
        return caps

    @property
    def wave_speed_threshold(self) -> float:
        return max(2.0 * math.sqrt(di * ri) for di, ri in zip(self.d, self.r))

    @classmethod
    def undelayed(cls, d, r, c, name: str = "lotka_volterra") -> "LotkaVolterraModel":
        """All kernels instantaneous (point mass at 0); tau = 0."""
        n = len(d)
        k = DelayKernel.point_mass(0.0)
        kernels = tuple(tuple(k for _ in range(n)) for _ in range(n))
        return cls(tuple(map(float, d)), tuple(map(float, r)),
                   tuple(tuple(map(float, row)) for row in c), kernels, name)

    @classmethod
    def fisher(cls, d: float = 1.0, r: float = 1.0) -> "LotkaVolterraModel":
        """Scalar logistic invasion model ru(1-u), the n = 1 undelayed case."""
        return cls.undelayed((d,), (r,), ((1.0,),), name="fisher")


@dataclass(frozen=True)
class ZouModel:
    """Scalar logistic equation with delayed growth term: r <u> (1 - u(0))."""

    d: float = 1.0
    r: float = 1.0
    kernel: DelayKernel = field(default_factory=lambda: DelayKernel.point_mass(-1.0))
    name: str = "zou"

    @property
    def n(self) -> int:
        return 1

    @property
    def kind(self) -> str:
        return self.name

    @property
    def tau(self) -> float:
        return self.kernel.tau


@dataclass(frozen=True)
class NicholsonModel:
    """Blowfly-type equation -u(0) + f(<u>) with f(w) = e^2 w e^{-w}."""

    d: float = 1.0
    kernel: DelayKernel = field(default_factory=lambda: DelayKernel.point_mass(-1.0))
    name: str = "nicholson"

    @property
    def n(self) -> int:
        return 1

    @property
    def kind(self) -> str:
        return self.name

    @property
    def tau(self) -> float:
        return self.kernel.tau


Model = LotkaVolterraModel | ZouModel | NicholsonModel


@dataclass(frozen=True)
class EquilibriumSet:
    """Homogeneous states of a competition model.

    positive is the coexistence state solving sum_j c_ij u_j* = 1, or None
    when the solution is not strictly positive.  carrying_caps are the
    per-species saturation levels (a_i c_ii)^{-1}.
    """

    zero: np.ndarray
    positive: np.ndarray | None
    carrying_caps: np.ndarray


def nicholson_f(w):
    """Blowfly production term f(w) = e^2 w e^{-w}; fixed points 0 and 2."""
    w = np.asarray(w, dtype=float)
    out = w * np.exp(2.0 - w)
    return out if out.ndim else float(out)


def nicholson_square(w):
    """Composition f(f(w)); increasing on [e^{3-e}, e] with sign change of
    f(f(w)) - w exactly at w = 2."""
    return nicholson_f(nicholson_f(w))


def reaction_eval(model: Model, i: int, history: History):
    """Evaluate reaction i on a history segment.

    history(s) must return the state at offset s as an array of shape (n,)
    or (n, m); every delay average is an exact atom sum.  Returns a scalar
    (or length-m array) with the same broadcasting as the history values.
    """
    if i < 0 or i >= model.n:
        raise ModelError(f"species index {i} out of range for n = {model.n}")
    if isinstance(model, LotkaVolterraModel):
        coupling = None
        for j in range(model.n):
            cij = model.c[i][j]
            if cij == 0.0:
                continue
            avg = model.kernels[i][j].stieltjes(lambda s: np.asarray(history(s))[j])
            term = cij * np.asarray(avg)
            coupling = term if coupling is None else coupling + term
        u_now = np.asarray(history(0.0))[i]
        return model.r[i] * u_now * (1.0 - coupling)
    if isinstance(model, ZouModel):
        avg = model.kernel.stieltjes(lambda s: np.asarray(history(s))[0])
        u_now = np.asarray(history(0.0))[0]
        return model.r * np.asarray(avg) * (1.0 - u_now)
    if isinstance(model, NicholsonModel):
        avg = model.kernel.stieltjes(lambda s: np.asarray(history(s))[0])
        u_now = np.asarray(history(0.0))[0]
        return -u_now + nicholson_f(avg)
    raise ModelError(f"unknown model kind {type(model)!r}")


def constant_history(values) -> History:
    values = np.asarray(values, dtype=float)
    return lambda s: values


def equilibrium_target(model: Model) -> np.ndarray:
    """The positive state E that wave profiles connect to at +infinity."""
    if isinstance(model, LotkaVolterraModel):
        eq = positive_equilibrium(model)
        if eq.positive is None:
            raise NoEquilibriumError("model has no strictly positive equilibrium")
        return eq.positive
    if isinstance(model, ZouModel):
        return np.array([1.0])
    if isinstance(model, NicholsonModel):
        return np.array([2.0])
    raise ModelError(f"unknown model kind {type(model)!r}")


def positive_equilibrium(model: LotkaVolterraModel) -> EquilibriumSet:
    """Solve sum_j c_ij u_j* = 1 and report the coexistence state.

    Raises NoEquilibriumError for a singular interaction matrix; a solution
    with nonpositive components is flagged absent (positive = None).
    """
    if not isinstance(model, LotkaVolterraModel):
        raise ModelError("positive_equilibrium applies to competition models")
    c = np.asarray(model.c, dtype=float)
    try:
        u_star = np.linalg.solve(c, np.ones(model.n))
    except np.linalg.LinAlgError as exc:
        raise NoEquilibriumError(f"interaction matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(u_star)):
        raise NoEquilibriumError("interaction matrix is numerically singular")
    positive = u_star if np.all(u_star > 0) else None
    return EquilibriumSet(zero=np.zeros(model.n), positive=positive,
                          carrying_caps=model.carrying_caps)


def weak_coupling_check(model: LotkaVolterraModel) -> tuple[bool, np.ndarray]:
    """Row-sum condition sum_j c_ij (c_jj a_j)^{-1} < 2 for every species.

    Returns (holds, margins) with margins_i = 2 - sum_j c_ij (c_jj a_j)^{-1}.
    Under this condition the coexistence state attracts all positive
    homogeneous states regardless of delay size.
    """
    a = model.a
    if np.any(a == 0):
        raise ModelError("weak-coupling condition needs a_j > 0 for every species")
    n = model.n
    caps = np.array([1.0 / (model.c[j][j] * a[j]) for j in range(n)])
    margins = np.array([2.0 - sum(model.c[i][j] * caps[j] for j in range(n)) for i in range(n)])
    return bool(np.all(margins > 0)), margins


def _random_history_pairs(model: Model, box: np.ndarray, i: int, n_samples: int,
                          rng: np.random.Generator):
    """Sampled history pairs differing only in the species-i value at s = 0."""
    if isinstance(model, LotkaVolterraModel):
        offsets = sorted({s for row in model.kernels for k in row for s, _ in k.atoms} | {0.0})
    else:
        offsets = sorted({s for s, _ in model.kernel.atoms} | {0.0})
    n = model.n
    base = {s: rng.uniform(0.0, 1.0, size=(n, n_samples)) * box[:, None] for s in offsets}
    x_lo = rng.uniform(0.0, 1.0, size=n_samples) * box[i]
    x_hi = x_lo + rng.uniform(0.0, 1.0, size=n_samples) * (box[i] - x_lo)

    def history_with(x):
        def h(s):
            vals = base[s].copy()
            if s == 0.0:
                vals[i] = x
            return vals
        return h

    return history_with(x_lo), history_with(x_hi), x_lo, x_hi


def audit_beta(model: Model, box, beta: float, n_samples: int = 1000,
               seed: int = 0, slack: float = 1e-10) -> bool:
    """Check that beta*u_i(0) + f_i is nondecreasing in u_i(0) on [0, box].

    Randomized finite differences: histories agree except at the species-i
    instantaneous value.  All sampled differences must be >= -slack.
    """
    box = np.broadcast_to(np.asarray(box, dtype=float), (model.n,))
    rng = np.random.default_rng(seed)
    for i in range(model.n):
        h_lo, h_hi, x_lo, x_hi = _random_history_pairs(model, box, i, n_samples, rng)
        g_lo = beta * x_lo + np.asarray(reaction_eval(model, i, h_lo))
        g_hi = beta * x_hi + np.asarray(reaction_eval(model, i, h_hi))
        if np.any(g_hi - g_lo < -slack):
            return False
    return True


def lipschitz_beta(model: Model, box) -> float:
    """Smallest convenient beta making beta*u_i(0) + f_i nondecreasing on [0, box].

    Closed-form bounds per model family, then a randomized monotonicity
    audit; the bound is doubled until the audit passes (it always does for
    the polynomially bounded reactions here).
    """
    box = np.broadcast_to(np.asarray(box, dtype=float), (model.n,)).astype(float)
    if np.any(~np.isfinite(box)):
        raise ModelError("need a finite box to bound the reaction slope")
    if isinstance(model, LotkaVolterraModel):
        a = model.a
        beta = 0.0
        for i in range(model.n):
            others = sum(model.c[i][j] * box[j] for j in range(model.n) if j != i)
            beta = max(beta, model.r[i] * (2.0 * model.c[i][i] * a[i] * box[i] + others + 1.0))
    elif isinstance(model, ZouModel):
        beta = model.r * (box[0] + 1.0)
    elif isinstance(model, NicholsonModel):
        # reaction is -u(0) + f(<u>): slope in u(0) is the constant -1
        beta = 2.0
    else:
        raise ModelError(f"unknown model kind {type(model)!r}")
    for _ in range(60):
        if audit_beta(model, box, beta):
            return float(beta)
        beta *= 2.0
    raise ModelError("monotonicity audit kept failing; reaction slope unbounded on box?")
