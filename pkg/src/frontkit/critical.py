"""Scalar critical-speed wave by continuation in the speed.

For the scalar delayed logistic equation the wave existence threshold is
c* = 2 sqrt(d r); profiles at the threshold itself are reached as the limit
of supercritical solves along a decreasing speed sequence c_n -> c*.  Near
c* the lower profile of the sandwich degenerates (its admissible shape
interval collapses), so the continuation drops it: each step is
warm-started damped Picard clipped to [0, min(e^{g1(c_n) xi}, 1/b)].  The
exponential cap stays a valid upper profile at every supercritical speed
and removes the slowly decaying edge modes that otherwise make warm starts
drift sideways.  After each step the profile is translated so the level
(2b-1)/(8b) is first attained at xi = 0 (exact on the grid).

b is the instantaneous weight of the delay kernel and must lie in
(1/2, 1]; b = 1 is the undelayed logistic limit with level 1/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import decay_rates
from .kernels import DelayKernel
from .models import LotkaVolterraModel, lipschitz_beta
from .waves import SolveOptions, WaveProfile, apply_operator, normalize_phase, residual, solve_wave

__all__ = ["ScalarCriticalSpec", "ContinuationStep", "ContinuationResult", "critical_wave"]


@dataclass(frozen=True)
class ScalarCriticalSpec:
    """Scalar model data plus the continuation schedule.

    speed_sequence defaults to c*(1 + 2^-n), n = 1..20, truncated once the
    relative distance to c* drops below speed_tol.
    """

    d: float
    r: float
    kernel: DelayKernel
    speed_sequence: tuple[float, ...] | None = None
    speed_tol: float = 1e-3

    def __post_init__(self):
        if self.d <= 0 or self.r <= 0:
            raise ValueError("need d > 0 and r > 0")
        b = self.instantaneous_weight
        if not 0.5 < b <= 1.0:
            raise ValueError(f"instantaneous kernel weight b = {b} outside (1/2, 1]")
        seq = self.speeds
        if np.any(np.diff(seq) >= 0):
            raise ValueError("speed sequence must be strictly decreasing")
        if seq[0] >= 2.0 * self.critical_speed:
            raise ValueError("first continuation speed must stay below 4 sqrt(d r)")
        if seq[-1] <= self.critical_speed:
            raise ValueError("continuation speeds must stay above the threshold")

    @property
    def critical_speed(self) -> float:
        return 2.0 * math.sqrt(self.d * self.r)

    @property
    def instantaneous_weight(self) -> float:
        return self.kernel.diagonal_split()[0]

    @property
    def normalization_level(self) -> float:
        b = self.instantaneous_weight
        return (2.0 * b - 1.0) / (8.0 * b)

    @property
    def box_top(self) -> float:
        return 1.0 / self.instantaneous_weight

    @property
    def speeds(self) -> np.ndarray:
        if self.speed_sequence is not None:
            return np.asarray(self.speed_sequence, dtype=float)
        c_star = self.critical_speed
        return c_star * (1.0 + 2.0 ** -np.arange(1, 21, dtype=float))

    def model(self) -> LotkaVolterraModel:
        return LotkaVolterraModel(d=(self.d,), r=(self.r,), c=((1.0,),),
                                  kernels=((self.kernel,),), name="scalar-critical")


@dataclass
class ContinuationStep:
    speed: float
    delta: float  # sup-norm change of the normalized profile vs previous step
    residual: float
    iterations: int
    converged: bool
    ambiguous_phase: bool


@dataclass
class ContinuationResult:
    profile: WaveProfile
    steps: list[ContinuationStep] = field(default_factory=list)
    profiles: list[WaveProfile] = field(default_factory=list)
    failure_index: int | None = None

    @property
    def converged(self) -> bool:
        return self.failure_index is None and all(s.converged for s in self.steps)


def _normalized(profile: WaveProfile, level: float):
    shifted, info = normalize_phase(profile, level)
    return shifted, info.ambiguous


def _picard_capped(model, profile: WaveProfile, beta: float, upper: np.ndarray,
                   omega: float, tol: float, max_iter: int):
    """Damped Picard clipped to [0, upper].

    upper is the exponential-cap profile min(e^{g1 xi}, 1/b), which remains
    a generalized upper solution at every supercritical speed; clipping
    against it kills the slowly decaying edge modes that otherwise make
    warm-started iterates drift sideways near the threshold.
    """
    xi = profile.xi
    rates = [rate for _, rate in profile.left_tail]
    delta = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        image = apply_operator(profile, model, beta)
        new = (1.0 - omega) * profile.values + omega * image.values
        np.clip(new, 0.0, upper, out=new)
        delta = float(np.max(np.abs(new - profile.values)))
        profile = WaveProfile.with_matched_tails(xi, new, rates, profile.speed)
        if delta <= tol:
            break
    return profile, delta, iterations


def critical_wave(spec: ScalarCriticalSpec, xi_min: float | None = None,
                  xi_max: float | None = None, h: float = 0.02,
                  omega: float = 0.5, tol_update: float = 1e-8,
                  max_iter: int = 60000) -> ContinuationResult:
    """March the speed sequence down to within speed_tol of the threshold.

    The first (fastest) speed is solved with the full sandwich machinery;
    every later speed is warm-started from the previous normalized profile.
    Each profile is translated so the normalization level is first attained
    at xi = 0 (interpolated crossing, hence exact on the grid).  A failed
    inner solve stops the march and records the failure index; the profiles
    collected so far are still returned.
    """
    model = spec.model()
    c_star = spec.critical_speed
    speeds = [float(c) for c in spec.speeds
              if (c - c_star) / c_star >= spec.speed_tol]
    if not speeds:
        raise ValueError("speed sequence starts below speed_tol of the threshold")
    # keep the first speed past the cutoff so the march ends within tolerance
    full = [float(c) for c in spec.speeds]
    if len(speeds) < len(full):
        speeds.append(full[len(speeds)])

    level = spec.normalization_level
    beta = lipschitz_beta(model, np.array([spec.box_top]))

    g1_first, _ = decay_rates(spec.d, spec.r, speeds[0])
    if xi_min is None:
        xi_min = -45.0 / g1_first
    if xi_max is None:
        xi_max = 45.0 / math.sqrt(spec.r / spec.d)
    # keep 0 on the grid so the pinned crossing lands on a node exactly
    xi_min = -h * math.ceil(-xi_min / h)
    xi_max = h * math.ceil(xi_max / h)

    opts = SolveOptions(xi_min=xi_min, xi_max=xi_max, h=h, omega=omega,
                        tol_update=tol_update, beta=beta)
    profile, report = solve_wave(model, speeds[0], opts)
    profile, amb = _normalized(profile, level)
    result = ContinuationResult(profile=profile)
    result.steps.append(ContinuationStep(
        speed=speeds[0], delta=math.nan, residual=report.final_residual,
        iterations=report.iterations, converged=report.converged,
        ambiguous_phase=amb))
    result.profiles.append(profile)
    if not report.converged:
        result.failure_index = 0
        return result

    xi = profile.xi
    prev = profile
    for idx, c in enumerate(speeds[1:], start=1):
        g1, _ = decay_rates(spec.d, spec.r, c)
        upper = np.minimum(np.exp(np.minimum(g1 * xi, math.log(spec.box_top))),
                           spec.box_top)
        warm = WaveProfile.with_matched_tails(
            xi, np.minimum(prev.values.copy(), upper[None, :]), [g1], c)
        solved, delta_inner, iterations = _picard_capped(
            model, warm, beta, upper, omega, tol_update, max_iter)
        res = float(np.max(np.abs(residual(solved, model))))
        try:
            solved, amb = _normalized(solved, level)
        except ValueError:
            result.failure_index = idx
            return result
        step_delta = float(np.max(np.abs(solved.values - prev.values)))
        converged = delta_inner <= tol_update
        result.steps.append(ContinuationStep(
            speed=c, delta=step_delta, residual=res, iterations=iterations,
            converged=converged, ambiguous_phase=amb))
        result.profiles.append(solved)
        result.profile = solved
        if not converged:
            result.failure_index = idx
            return result
        prev = solved
    return result
