"""Contracting rectangle families and asymptotic-limit verdicts.

A one-parameter family of ordered boxes Sigma(y) = [a(y), b(y)], y in
[0, 1], is strictly contracting when the reaction points strictly inward on
every face: f_i > 0 where the i-th coordinate is pinned to a_i(y) and
f_i < 0 where it is pinned to b_i(y), for histories ranging over the box.
A computed wave profile whose tail envelope climbs the family (largest
admissible y -> 1 as xi -> infinity) is certified to converge to the common
target a(1) = b(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .models import (LotkaVolterraModel, Model, nicholson_f, nicholson_square,
                     positive_equilibrium, reaction_eval, weak_coupling_check)
from .waves import WaveProfile

__all__ = [
    "RectangleFamily",
    "lv_family",
    "nicholson_family",
    "zou_family",
    "find_lv_epsilon",
    "verify_strict_contraction",
    "limit_verdict",
    "ContractionReport",
    "NotContractingError",
    "HypothesisViolatedError",
]

K_NICHOLSON = 2.0
K1_NICHOLSON = math.exp(3.0 - math.e)


class NotContractingError(ValueError):
    """Family refused: the construction's contraction condition fails."""


class HypothesisViolatedError(ValueError):
    """Profile leaves the outermost box; the verdict machinery does not apply."""


@dataclass(frozen=True)
class RectangleFamily:
    """Ordered interval family y -> [a(y), b(y)] with common target at y = 1."""

    a: Callable[[float], np.ndarray]
    b: Callable[[float], np.ndarray]
    target: np.ndarray
    label: str = "family"

    @property
    def n(self) -> int:
        return len(self.target)

    def nesting_ok(self, y_grid=None, tol: float = 1e-10) -> bool:
        """Check the ordering chain a(0) <= ... <= a(1) = target = b(1) <= ... <= b(0)."""
        if y_grid is None:
            y_grid = np.linspace(0.0, 1.0, 101)
        av = np.stack([self.a(y) for y in y_grid])
        bv = np.stack([self.b(y) for y in y_grid])
        if np.any(np.diff(av, axis=0) < -tol) or np.any(np.diff(bv, axis=0) > tol):
            return False
        if np.any(av > bv + tol):
            return False
        return (np.allclose(av[-1], self.target, atol=1e-9)
                and np.allclose(bv[-1], self.target, atol=1e-9))


def lv_family(model: LotkaVolterraModel, epsilon: float,
              require_weak_coupling: bool = True) -> RectangleFamily:
    """Affine family a(y) = y u*, b(y) = y u* + (1-y)(caps + eps).

    Contraction of this family needs the weak-coupling row-sum condition;
    construction is refused when it fails unless require_weak_coupling is
    dropped (useful for negative controls).
    """
    if epsilon <= 0:
        raise NotContractingError("margin epsilon must be positive")
    holds, margins = weak_coupling_check(model)
    if require_weak_coupling and not holds:
        raise NotContractingError(
            f"weak-coupling condition fails (margins {margins}); family is not contracting")
    eq = positive_equilibrium(model)
    if eq.positive is None:
        raise NotContractingError("no strictly positive equilibrium")
    u_star = eq.positive
    top = eq.carrying_caps + epsilon

    def a(y: float) -> np.ndarray:
        return y * u_star

    def b(y: float) -> np.ndarray:
        return y * u_star + (1.0 - y) * top

    return RectangleFamily(a=a, b=b, target=u_star, label="competition-affine")


def find_lv_epsilon(model: LotkaVolterraModel, y_samples=None,
                    face_samples: int = 400, seed: int = 0,
                    min_epsilon: float = 2.0 ** -20) -> float:
    """Largest margin epsilon in {1, 1/2, 1/4, ...} whose affine family
    passes the strict-contraction check."""
    eps = 1.0
    while eps >= min_epsilon:
        family = lv_family(model, eps)
        report = verify_strict_contraction(family, model, y_samples=y_samples,
                                           face_samples=face_samples, seed=seed)
        if report.passed:
            return eps
        eps *= 0.5
    raise NotContractingError("no margin in (0, 1] passes the contraction check")


def _nicholson_h(s):
    base = s * K_NICHOLSON + (1.0 - s) * K1_NICHOLSON
    return 0.5 * (nicholson_square(base) - base)


def nicholson_family(epsilon: float) -> RectangleFamily:
    """Family a(s) = s k + (1-s) k1 + eps h(s), b(s) = f(s k + (1-s) k1).

    k = 2, k1 = e^{3-e}; 2 h(s) = f(f(base)) - base > 0 on (0, 1).  epsilon
    must lie in (0, 1) and keep a(s) < 2 on (0, 1).
    """
    if not 0.0 < epsilon < 1.0:
        raise NotContractingError(f"epsilon must be in (0, 1), got {epsilon}")
    s_grid = np.linspace(0.0, 1.0, 501)[1:-1]
    base = s_grid * K_NICHOLSON + (1.0 - s_grid) * K1_NICHOLSON
    a_vals = base + epsilon * _nicholson_h(s_grid)
    if np.any(a_vals >= 2.0):
        raise NotContractingError(f"epsilon {epsilon} too large: a(s) reaches 2")

    def a(s: float) -> np.ndarray:
        b0 = s * K_NICHOLSON + (1.0 - s) * K1_NICHOLSON
        return np.array([b0 + epsilon * _nicholson_h(s)])

    def b(s: float) -> np.ndarray:
        return np.array([nicholson_f(s * K_NICHOLSON + (1.0 - s) * K1_NICHOLSON)])

    return RectangleFamily(a=a, b=b, target=np.array([2.0]), label="blowfly")


def zou_family(k: float) -> RectangleFamily:
    """Family a(s) = s, b(s) = (1+k)(1-s) + s for the delayed-growth logistic."""
    if k <= 0:
        raise NotContractingError(f"headroom k must be positive, got {k}")

    def a(s: float) -> np.ndarray:
        return np.array([s])

    def b(s: float) -> np.ndarray:
        return np.array([(1.0 + k) * (1.0 - s) + s])

    return RectangleFamily(a=a, b=b, target=np.array([1.0]), label="delayed-logistic")


@dataclass
class ContractionReport:
    """Face margins per sampled y: a-face minima (need > 0) and b-face
    maxima (need < 0) of the pinned reaction over box histories."""

    label: str
    y_samples: np.ndarray
    a_face_min: np.ndarray  # (len(y), n)
    b_face_max: np.ndarray
    violations: list[tuple[float, int, str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def format(self) -> str:
        lines = [f"strict-contraction check for {self.label}"]
        for k, y in enumerate(self.y_samples):
            amin = np.array2string(self.a_face_min[k], precision=4)
            bmax = np.array2string(self.b_face_max[k], precision=4)
            lines.append(f"  y = {y:.3f}: a-face min {amin} (> 0), b-face max {bmax} (< 0)")
        lines.append("  PASS" if self.passed else
                     f"  FAIL ({len(self.violations)} face violations)")
        return "\n".join(lines)


def _model_offsets(model: Model) -> list[float]:
    if isinstance(model, LotkaVolterraModel):
        offs = {s for row in model.kernels for kern in row for s, _ in kern.atoms}
    else:
        offs = {s for s, _ in model.kernel.atoms}
    offs.add(0.0)
    return sorted(offs)


def _face_extremum(model: Model, a_vec: np.ndarray, b_vec: np.ndarray, i: int,
                   face: str, n_samples: int, rng: np.random.Generator) -> float:
    """Min (a-face) or max (b-face) of f_i over histories in the box with the
    species-i instantaneous value pinned to the face.

    Corner states are enumerated exactly for n <= 8 (the reactions here are
    monotone in each history coordinate, so corners are the true extrema);
    seeded random interior samples are always added.
    """
    n = model.n
    offsets = _model_offsets(model)
    pinned = a_vec[i] if face == "a" else b_vec[i]

    corner_states = []
    if n <= 8:
        for mask in range(2 ** n):
            sel = np.array([(mask >> j) & 1 for j in range(n)], dtype=bool)
            corner_states.append(np.where(sel, b_vec, a_vec))
    m = len(corner_states) + n_samples
    vals = {}
    for s in offsets:
        block = np.empty((n, m))
        for kdx, state in enumerate(corner_states):
            block[:, kdx] = state
        block[:, len(corner_states):] = (a_vec[:, None] + rng.uniform(size=(n, n_samples))
                                         * (b_vec - a_vec)[:, None])
        vals[s] = block
    vals[0.0][i, :] = pinned

    f = np.asarray(reaction_eval(model, i, lambda s: vals[s]), dtype=float)
    return float(f.min() if face == "a" else f.max())


def verify_strict_contraction(family: RectangleFamily, model: Model,
                              y_samples=None, face_samples: int = 1000,
                              seed: int = 0, tol: float = 0.0) -> ContractionReport:
    """Sample both faces of Sigma(y) at interior levels y and record margins.

    Violations (a-face reaction <= tol or b-face reaction >= -tol) are
    report data, not errors.
    """
    if y_samples is None:
        y_samples = np.linspace(0.1, 0.9, 9)
    y_samples = np.asarray(y_samples, dtype=float)
    rng = np.random.default_rng(seed)
    n = family.n
    a_face = np.empty((len(y_samples), n))
    b_face = np.empty((len(y_samples), n))
    violations: list[tuple[float, int, str, float]] = []
    for kdx, y in enumerate(y_samples):
        a_vec = np.asarray(family.a(y), dtype=float)
        b_vec = np.asarray(family.b(y), dtype=float)
        for i in range(n):
            lo = _face_extremum(model, a_vec, b_vec, i, "a", face_samples, rng)
            hi = _face_extremum(model, a_vec, b_vec, i, "b", face_samples, rng)
            a_face[kdx, i] = lo
            b_face[kdx, i] = hi
            if lo <= tol:
                violations.append((float(y), i, "a", lo))
            if hi >= -tol:
                violations.append((float(y), i, "b", hi))
    return ContractionReport(label=family.label, y_samples=y_samples,
                             a_face_min=a_face, b_face_max=b_face,
                             violations=violations)


def _largest_y(family: RectangleFamily, smin: np.ndarray, smax: np.ndarray,
               slack: float = 1e-12, iters: int = 50) -> float:
    """Largest y with a(y) <= smin and b(y) >= smax (componentwise), by
    bisection over the nested family; -1 when even y = 0 fails."""

    def fits(y: float) -> bool:
        return bool(np.all(family.a(y) <= smin + slack)
                    and np.all(family.b(y) >= smax - slack))

    if not fits(0.0):
        return -1.0
    if fits(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def limit_verdict(profile: WaveProfile, family: RectangleFamily,
                  tol_y: float = 0.02, max_trace: int = 2000) -> tuple[bool, np.ndarray, np.ndarray]:
    """Certify convergence of the profile to the family target at +infinity.

    For each xi the trace records the largest y whose box contains the whole
    tail envelope [min, max over zeta >= xi] of the profile; the verdict is
    positive when the trace exceeds 1 - tol_y at the right end.  Returns
    (verdict, xi_trace, y_trace).
    """
    v = profile.values
    smin = np.minimum.accumulate(v[:, ::-1], axis=1)[:, ::-1]
    smax = np.maximum.accumulate(v[:, ::-1], axis=1)[:, ::-1]
    npts = v.shape[1]
    step = max(1, npts // max_trace)
    idx = np.arange(0, npts, step)
    if idx[-1] != npts - 1:
        idx = np.append(idx, npts - 1)
    trace = np.array([_largest_y(family, smin[:, k], smax[:, k]) for k in idx])
    if trace[-1] < 0:
        raise HypothesisViolatedError(
            "profile tail leaves the outermost box; the family does not apply")
    verdict = bool(trace[-1] >= 1.0 - tol_y)
    return verdict, profile.xi[idx], trace
