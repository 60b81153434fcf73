"""Gridded wave profiles and the Green's-function fixed-point iteration.

A traveling wave profile solves

    d_i psi_i'' - c psi_i' + f_i(psi(. + c s)) = 0

and is computed as a fixed point of the smoothing operator

    F_i(Phi)(xi) = G_i * (beta phi_i + f_i(Phi_xi)),

where G_i is the two-sided exponential kernel of (-d_i D^2 + c D + beta)^{-1}
and beta is large enough that the bracket is monotone in phi_i(xi).  The
iteration is damped Picard started from the explicit upper profile and
projected onto the [lower, upper] sandwich each step; equilibria are exact
fixed points of the discrete operator, and profiles live on a uniform grid
with analytic tail extensions (exponential on the left, constant on the
right).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import greens
from .bounds import BoundPair, build_bounds
from .models import (LotkaVolterraModel, audit_beta, equilibrium_target,
                     lipschitz_beta, reaction_eval)

__all__ = [
    "WaveProfile",
    "SolveOptions",
    "SolveReport",
    "apply_operator",
    "solve_wave",
    "residual",
    "tail_ratio",
    "normalize_phase",
]


@dataclass(frozen=True)
class WaveProfile:
    """Per-species values on a uniform grid plus analytic tail extensions.

    left_tail[j] = (amplitude, rate) extends species j as A e^{rate xi} for
    xi below the grid (rate 0 encodes a constant extension); right_tail[j]
    is the constant value beyond the grid.  Tails are kept continuous with
    the grid endpoints.
    """

    xi: np.ndarray
    values: np.ndarray
    left_tail: tuple[tuple[float, float], ...]
    right_tail: tuple[float, ...]
    speed: float

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @classmethod
    def with_matched_tails(cls, xi, values, rates, speed) -> "WaveProfile":
        """Build a profile whose left tails match the endpoint values.

        Amplitudes are solved in log space (A = exp(ln v0 - rate*xi_0)), so
        steep rates on wide grids cannot overflow.
        """
        xi = np.asarray(xi, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        left = []
        for j, rate in enumerate(np.broadcast_to(rates, (values.shape[0],))):
            v0 = values[j, 0]
            if v0 <= 0.0 or rate == 0.0:
                left.append((max(v0, 0.0) if rate == 0.0 else 0.0, float(rate)))
            else:
                left.append((math.exp(math.log(v0) - rate * xi[0]), float(rate)))
        right = tuple(float(values[j, -1]) for j in range(values.shape[0]))
        return cls(xi, values, tuple(left), right, float(speed))

    def eval_species(self, j: int, pts) -> np.ndarray:
        scalar = np.ndim(pts) == 0
        pts = np.atleast_1d(np.asarray(pts, dtype=float))
        out = np.interp(pts, self.xi, self.values[j])
        amp, rate = self.left_tail[j]
        left = pts < self.xi[0]
        if np.any(left):
            out[left] = amp if rate == 0.0 else amp * np.exp(rate * pts[left])
        right = pts > self.xi[-1]
        if np.any(right):
            out[right] = self.right_tail[j]
        return float(out[0]) if scalar else out

    def eval_all(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.stack([self.eval_species(j, pts) for j in range(self.n)])

    def shifted(self, delta: float) -> "WaveProfile":
        """Profile translated so new(xi) = old(xi + delta), resampled on the
        same grid (linear interpolation inside, tails analytic)."""
        vals = self.eval_all(self.xi + delta)
        rates = [rate for _, rate in self.left_tail]
        out = WaveProfile.with_matched_tails(self.xi, vals, rates, self.speed)
        return replace(out, right_tail=self.right_tail)

    def tail_mismatch(self) -> float:
        """Worst relative discontinuity between tails and grid endpoints."""
        worst = 0.0
        for j in range(self.n):
            amp, rate = self.left_tail[j]
            tail0 = amp if rate == 0.0 else amp * math.exp(rate * self.xi[0])
            scale = max(abs(self.values[j]).max(), 1e-300)
            worst = max(worst, abs(tail0 - self.values[j, 0]) / scale,
                        abs(self.right_tail[j] - self.values[j, -1]) / scale)
        return worst


def _history_function(profile: WaveProfile, base_pts: np.ndarray, speed: float):
    """Memoized history: H(s) = profile values at base_pts + speed*s."""
    cache: dict[float, np.ndarray] = {}

    def hist(s: float) -> np.ndarray:
        got = cache.get(s)
        if got is None:
            got = profile.eval_all(base_pts + speed * s)
            cache[s] = got
        return got

    return hist


def _grid_history(profile: WaveProfile):
    """History on the profile's own grid; s = 0 returns the stored values
    exactly (no interpolation noise)."""
    cache: dict[float, np.ndarray] = {0.0: profile.values}

    def hist(s: float) -> np.ndarray:
        got = cache.get(s)
        if got is None:
            got = profile.eval_all(profile.xi + profile.speed * s)
            cache[s] = got
        return got

    return hist


def _left_tail_integral(profile: WaveProfile, model, i: int, beta: float,
                        nu1: float) -> float:
    """int_{-inf}^{xi_0} e^{nu1 (xi_0 - s)} (beta phi_i + f_i)(s) ds.

    The beta part integrates in closed form against the exponential tail.
    The reaction part is quadrature over a window of width 10 / min(rate)
    (truncation ~e^{-10} relative); with all-constant tails it collapses to
    a closed form, which keeps constant profiles exact fixed points.
    """
    x0 = float(profile.xi[0])
    amp_i, rate_i = profile.left_tail[i]
    total = beta * greens.left_tail_exponential(amp_i, rate_i, x0, nu1)

    rates = [rate for _, rate in profile.left_tail]
    pos = [rate for rate in rates if rate > 0.0]
    if not pos:
        state = np.array([amp for amp, _ in profile.left_tail])
        f_const = float(reaction_eval(model, i, lambda s: state))
        return total + f_const / (-nu1)

    h = profile.h
    width = 10.0 / min(pos)
    m = max(int(math.ceil(width / h)), 4)
    pts = x0 - h * np.arange(m, -1, -1.0)
    hist = _history_function(profile, pts, profile.speed)
    f_vals = np.asarray(reaction_eval(model, i, hist), dtype=float)
    # left-convolution across the window, truncated at its far end: the
    # accumulated value at x0 is sum_k a1^(m-1-k) cells[k]
    a1 = math.exp(nu1 * h)
    cells = greens._left_cells(f_vals, h, nu1)
    weights = a1 ** np.arange(len(cells) - 1, -1, -1, dtype=float)
    return total + float(weights @ cells)


def apply_operator(profile: WaveProfile, model, beta: float) -> WaveProfile:
    """One application of the smoothing operator F at the profile's speed."""
    c = profile.speed
    hist = _grid_history(profile)
    out = np.empty_like(profile.values)
    for i in range(profile.n):
        f_i = np.asarray(reaction_eval(model, i, hist), dtype=float)
        L = beta * profile.values[i] + f_i
        nu1, nu2 = greens.exponents(model.d[i], c, beta)
        T = _left_tail_integral(profile, model, i, beta, nu1)
        state = np.array(profile.right_tail)
        f_right = float(reaction_eval(model, i, lambda s: state))
        R = (beta * profile.right_tail[i] + f_right) / nu2
        out[i] = greens.green_apply(L, profile.h, model.d[i], c, beta,
                                    left_tail_integral=T, right_tail_integral=R)
    rates = [rate for _, rate in profile.left_tail]
    return WaveProfile.with_matched_tails(profile.xi, out, rates, c)


@dataclass(frozen=True)
class SolveOptions:
    """Iteration controls; grid fields default from the model's decay rates."""

    xi_min: float | None = None
    xi_max: float | None = None
    h: float | None = None
    omega: float = 0.5
    tol_update: float = 1e-8
    tol_residual: float = 1e-5
    max_iter: int = 10000
    beta: float | None = None
    max_points: int = 400_000


@dataclass
class SolveReport:
    iterations: int
    final_update_norm: float
    final_residual: float
    converged: bool
    monotone_flags: tuple[bool, ...]
    overshoot: np.ndarray
    beta: float
    eta: float
    q: float
    gamma1: np.ndarray
    right_limits: np.ndarray
    target: np.ndarray

    def format(self) -> str:
        lines = [
            f"iterations: {self.iterations}",
            f"final update norm: {self.final_update_norm:.3e}",
            f"final residual: {self.final_residual:.3e}",
            f"converged: {self.converged}",
            f"beta = {self.beta:.6g}, eta = {self.eta:.6g}, q = {self.q:.6g}",
            f"gamma1 = {np.array2string(self.gamma1, precision=6)}",
        ]
        for i, (mono, over) in enumerate(zip(self.monotone_flags, self.overshoot)):
            lines.append(f"species {i + 1}: monotone={mono} overshoot={over:+.4e} "
                         f"right_limit={self.right_limits[i]:.6f} target={self.target[i]:.6f}")
        return "\n".join(lines)


def default_grid(pair: BoundPair, options: SolveOptions) -> np.ndarray:
    """Uniform grid covering the sandwich: 40 decay lengths on both sides,
    widened if needed so every corner and lower-profile peak is interior."""
    gmin = float(pair.gamma1.min())
    gmax = float(pair.gamma1.max())
    peaks = [pair.lower_peak(i)[0] for i in range(pair.n)]
    lo = options.xi_min
    if lo is None:
        lo = min(-40.0 / gmin, min(peaks) - 5.0 / gmin, pair.breakpoints.min() - 5.0 / gmin)
    hi = options.xi_max
    if hi is None:
        hi = max(40.0 / gmin, pair.breakpoints.max() + 10.0 / gmin)
    h = options.h if options.h is not None else 0.01 / gmax
    # snap to multiples of h so xi = 0 is a node (phase pinning is then exact)
    lo = -h * math.ceil(-lo / h)
    n = int(math.ceil((hi - lo) / h)) + 1
    if n > options.max_points:
        raise ValueError(f"grid would need {n} points (> {options.max_points}); "
                         "widen h or narrow the span")
    return np.linspace(lo, lo + h * (n - 1), n)


def solve_wave(model: LotkaVolterraModel, c: float,
               options: SolveOptions | None = None,
               pair: BoundPair | None = None) -> tuple[WaveProfile, SolveReport]:
    """Damped, sandwich-projected Picard iteration from the upper profile.

    Raises SpeedBelowThresholdError (via the bound construction) for speeds
    at or below max_i 2 sqrt(d_i r_i).  Non-convergence within the iteration
    cap is reported honestly (converged=False), profile still returned.
    """
    opts = options or SolveOptions()
    if pair is None:
        pair = build_bounds(model, c)
    xi = default_grid(pair, opts)
    landmarks = np.concatenate([pair.breakpoints,
                                [pair.lower_peak(i)[0] for i in range(pair.n)]])
    if landmarks.min() <= xi[0] or landmarks.max() >= xi[-1]:
        raise ValueError(
            f"grid [{xi[0]:.4g}, {xi[-1]:.4g}] must strictly contain every "
            f"sandwich corner and peak (range [{landmarks.min():.4g}, "
            f"{landmarks.max():.4g}])")
    upper_v = pair.upper_values(xi)
    lower_v = pair.lower_values(xi)
    if opts.beta is not None:
        if not audit_beta(model, pair.caps, opts.beta):
            raise ValueError(f"beta = {opts.beta} fails the monotonicity audit; "
                             "the sandwich property would be void")
        beta = opts.beta
    else:
        beta = lipschitz_beta(model, pair.caps)

    rates = pair.gamma1
    profile = WaveProfile.with_matched_tails(xi, upper_v.copy(), rates, c)
    delta = math.inf
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        image = apply_operator(profile, model, beta)
        new_v = (1.0 - opts.omega) * profile.values + opts.omega * image.values
        np.clip(new_v, lower_v, upper_v, out=new_v)
        delta = float(np.max(np.abs(new_v - profile.values)))
        profile = WaveProfile.with_matched_tails(xi, new_v, rates, c)
        if delta <= opts.tol_update:
            break

    res = residual(profile, model)
    res_norm = float(np.max(np.abs(res)))
    target = equilibrium_target(model)
    span = profile.values.max(axis=1) - profile.values.min(axis=1)
    monotone = tuple(bool(np.all(np.diff(profile.values[i]) >= -1e-9 * max(span[i], 1e-300)))
                     for i in range(profile.n))
    overshoot = profile.values.max(axis=1) - target
    report = SolveReport(
        iterations=iterations,
        final_update_norm=delta,
        final_residual=res_norm,
        converged=(delta <= opts.tol_update and res_norm <= opts.tol_residual),
        monotone_flags=monotone,
        overshoot=overshoot,
        beta=beta,
        eta=pair.eta,
        q=pair.q,
        gamma1=pair.gamma1,
        right_limits=profile.values[:, -1].copy(),
        target=np.asarray(target, dtype=float),
    )
    return profile, report


def residual(profile: WaveProfile, model) -> np.ndarray:
    """Wave-equation defect on interior grid points (central differences).

    Returns shape (n, N-2); the reaction history may reach into the tail
    extensions, the derivative stencil never does.
    """
    v = profile.values
    h = profile.h
    c = profile.speed
    d2 = (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / (h * h)
    d1 = (v[:, 2:] - v[:, :-2]) / (2.0 * h)
    pts = profile.xi[1:-1]
    hist = _history_function(profile, pts, c)
    out = np.empty_like(d1)
    for i in range(profile.n):
        f_i = np.asarray(reaction_eval(model, i, hist), dtype=float)
        out[i] = model.d[i] * d2[i] - c * d1[i] + f_i
    return out


def tail_ratio(profile: WaveProfile, probe_offset: float | None = None) -> np.ndarray:
    """Ratio psi_i(xi) e^{-rate_i xi} against the left tail asymptotics.

    Default: average over the leftmost 10% of the grid.  With probe_offset
    set, evaluate at xi = grid_min + probe_offset / rate_i per species.
    Underflow region (e^{rate xi} < 1e-300) is excluded; species with a
    constant extension report nan.
    """
    out = np.full(profile.n, np.nan)
    for i in range(profile.n):
        _, rate = profile.left_tail[i]
        if rate <= 0.0:
            continue
        if probe_offset is not None:
            x = profile.xi[0] + probe_offset / rate
            if rate * x < -690.0:
                continue
            val = float(profile.eval_species(i, np.array([x]))[0])
            out[i] = val * math.exp(-rate * x)
        else:
            m = max(int(0.1 * len(profile.xi)), 2)
            x = profile.xi[:m]
            ok = rate * x > -690.0
            if not np.any(ok):
                continue
            out[i] = float(np.mean(profile.values[i, :m][ok] * np.exp(-rate * x[ok])))
    return out


@dataclass(frozen=True)
class PhaseInfo:
    shift: float
    crossings: tuple[float, ...]
    ambiguous: bool


def normalize_phase(profile: WaveProfile, level: float, species: int = 0,
                    ambiguity_window: float | None = None) -> tuple[WaveProfile, PhaseInfo]:
    """Translate so the profile first attains `level` (species given) at 0.

    The leftmost interpolated upcrossing defines the shift; extra crossings
    within ambiguity_window (default 1/rate) of it are recorded.
    """
    v = profile.values[species]
    above = v >= level
    idx = np.nonzero(~above[:-1] & above[1:])[0]
    if above[0]:
        raise ValueError("profile already above the level at the left edge")
    if len(idx) == 0:
        raise ValueError(f"profile never attains level {level}")
    crossings = []
    for k in idx:
        frac = (level - v[k]) / (v[k + 1] - v[k])
        crossings.append(float(profile.xi[k] + frac * profile.h))
    sigma = crossings[0]
    if ambiguity_window is None:
        rate = profile.left_tail[species][1]
        ambiguity_window = 1.0 / rate if rate > 0 else profile.h * 10
    ambiguous = any(0 < x - sigma <= ambiguity_window for x in crossings[1:])
    shifted = profile.shifted(sigma)
    info = PhaseInfo(shift=sigma, crossings=tuple(crossings), ambiguous=ambiguous)
    return shifted, info
