"""Closed-form upper and lower wave profiles and their defining inequalities.

For a competition model and any speed c above the threshold
max_i 2 sqrt(d_i r_i), the pair

    upper_i(xi) = min(e^{g_i xi}, (a_i c_ii)^{-1}),
    lower_i(xi) = max(e^{g_i xi} - q e^{eta g_i xi}, 0),

with g_i the slow root of d_i g^2 - c g + r_i = 0, brackets a genuine wave
profile.  eta lives strictly inside an admissible interval determined by
the root ratios, and the depth q comes from a closed-form worst-case bound.
Everything here is piecewise analytic: the differential inequalities the
pair must satisfy off its corner set are evaluated exactly per smooth
piece, never by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import LotkaVolterraModel, ModelError

__all__ = [
    "decay_rates",
    "select_eta",
    "select_q",
    "build_bounds",
    "verify_bound_inequalities",
    "BoundPair",
    "BoundReport",
    "SpeedBelowThresholdError",
    "DegenerateIntervalError",
]


class SpeedBelowThresholdError(ValueError):
    """Speed below 2 sqrt(d r): the decay quadratic has complex roots."""


class DegenerateIntervalError(ValueError):
    """No admissible shape parameter (speed at or too near the threshold)."""


def decay_rates(d: float, r: float, c: float) -> tuple[float, float]:
    """Roots 0 < g1 <= g2 of d g^2 - c g + r = 0.

    g1 is computed as 2r / (c + sqrt(c^2 - 4 d r)) to avoid cancellation
    when 4 d r << c^2.  Raises SpeedBelowThresholdError for c < 2 sqrt(dr).
    """
    if d <= 0 or r <= 0:
        raise ValueError("need d > 0 and r > 0")
    disc = c * c - 4.0 * d * r
    if disc < 0:
        raise SpeedBelowThresholdError(
            f"speed {c} below threshold {2.0 * math.sqrt(d * r):.6g}: complex decay roots")
    s = math.sqrt(disc)
    g1 = 2.0 * r / (c + s)
    g2 = (c + s) / (2.0 * d)
    return g1, g2


def _all_rates(model: LotkaVolterraModel, c: float) -> tuple[np.ndarray, np.ndarray]:
    pairs = [decay_rates(di, ri, c) for di, ri in zip(model.d, model.r)]
    g1 = np.array([p[0] for p in pairs])
    g2 = np.array([p[1] for p in pairs])
    return g1, g2


def select_eta(model: LotkaVolterraModel, c: float) -> float:
    """Midpoint of the admissible shape interval.

    The interval is (1, min over species of {g_i2/g_i1, (g_i1+g_j1)/g_i1});
    its upper end always stays <= 2 via the i = j term.  Midpoint keeps the
    construction away from both degenerate ends.
    """
    g1, g2 = _all_rates(model, c)
    upper = min(np.min(g2 / g1), 1.0 + np.min(g1) / np.max(g1))
    if upper <= 1.0 + 1e-12:
        raise DegenerateIntervalError(
            f"admissible shape interval (1, {upper:.6g}) collapsed at speed {c}")
    return 0.5 * (1.0 + upper)


def select_q(model: LotkaVolterraModel, c: float, eta: float) -> float:
    """Depth parameter from the worst-case balance of the lower inequality.

    q = max_i (-r_i c_ii a_i - r_i sum_j c_ij) / (d_i eta^2 g_i1^2
        - c eta g_i1 + r_i) + 2, each denominator required negative.
    """
    g1, _ = _all_rates(model, c)
    a = model.a
    worst = -math.inf
    for i in range(model.n):
        den = model.d[i] * (eta * g1[i]) ** 2 - c * eta * g1[i] + model.r[i]
        if den >= 0:
            raise DegenerateIntervalError(
                f"shape {eta} inadmissible for species {i}: denominator {den:.3g} >= 0")
        num = -model.r[i] * model.c[i][i] * a[i] - model.r[i] * sum(model.c[i])
        worst = max(worst, num / den)
    return worst + 2.0


@dataclass(frozen=True)
class BoundPair:
    """Explicit profile sandwich for one model at one speed.

    breakpoints_upper[i] is where the exponential branch hits the cap;
    breakpoints_lower[i] is where the two-exponential branch crosses zero.
    Evaluation is exact per branch, including first and second derivatives.
    """

    speed: float
    gamma1: np.ndarray
    eta: float
    q: float
    caps: np.ndarray
    breakpoints_upper: np.ndarray
    breakpoints_lower: np.ndarray

    @property
    def n(self) -> int:
        return len(self.gamma1)

    @property
    def breakpoints(self) -> np.ndarray:
        """All corner locations (the exceptional set of the inequalities)."""
        return np.unique(np.concatenate([self.breakpoints_upper, self.breakpoints_lower]))

    def lower_peak(self, i: int) -> tuple[float, float]:
        """Location and value of the lower profile's maximum."""
        g = self.gamma1[i]
        xi = -math.log(self.q * self.eta) / ((self.eta - 1.0) * g)
        return xi, math.exp(g * xi) * (1.0 - 1.0 / self.eta)

    def upper(self, i: int, xi, order: int = 0):
        """Upper profile (order 0) or its first/second derivative per branch."""
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        g = self.gamma1[i]
        exp_branch = xi < self.breakpoints_upper[i]
        out = np.zeros_like(xi)
        out[exp_branch] = np.exp(g * xi[exp_branch]) * g ** order
        if order == 0:
            out[~exp_branch] = self.caps[i]
        return float(out[0]) if scalar else out

    def lower(self, i: int, xi, order: int = 0):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        g = self.gamma1[i]
        active = xi < self.breakpoints_lower[i]
        out = np.zeros_like(xi)
        x = xi[active]
        out[active] = (np.exp(g * x) * g ** order
                       - self.q * np.exp(self.eta * g * x) * (self.eta * g) ** order)
        return float(out[0]) if scalar else out

    def upper_values(self, xi) -> np.ndarray:
        return np.stack([self.upper(i, xi) for i in range(self.n)])

    def lower_values(self, xi) -> np.ndarray:
        return np.stack([self.lower(i, xi) for i in range(self.n)])


def build_bounds(model: LotkaVolterraModel, c: float) -> BoundPair:
    """Construct the closed-form sandwich for speed c above the threshold."""
    if not isinstance(model, LotkaVolterraModel):
        raise ModelError("bound construction applies to competition models")
    a = model.a
    if np.any(a <= 0):
        raise ModelError("bound construction needs instantaneous self-limitation a_i > 0")
    g1, _ = _all_rates(model, c)
    eta = select_eta(model, c)
    q = select_q(model, c, eta)
    caps = model.carrying_caps
    bp_up = np.array([-math.log(a[i] * model.c[i][i]) / g1[i] for i in range(model.n)])
    bp_lo = np.array([-math.log(q) / ((eta - 1.0) * g1[i]) for i in range(model.n)])
    return BoundPair(speed=c, gamma1=g1, eta=eta, q=q, caps=caps,
                     breakpoints_upper=bp_up, breakpoints_lower=bp_lo)


@dataclass
class BoundReport:
    """Outcome of checking the two differential inequalities on a grid.

    Margins are signed so that negative is good for the upper check
    (worst_upper = max LHS must be <= 0) and positive is good for the lower
    check (worst_lower = min LHS must be >= 0).  Violations are data, not
    errors.
    """

    speed: float
    eta: float
    q: float
    gamma1: np.ndarray
    worst_upper: np.ndarray
    worst_lower: np.ndarray
    breakpoints: np.ndarray | None = None
    violations: list[tuple[str, int, float, float]] = field(default_factory=list)
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return not self.violations

    def format(self) -> str:
        lines = [
            f"bound verification at speed c = {self.speed:.6g}",
            f"  eta = {self.eta:.9g}, q = {self.q:.9g}",
            f"  gamma1 = {np.array2string(self.gamma1, precision=6)}",
        ]
        if self.breakpoints is not None:
            lines.append(f"  corner set: {np.array2string(self.breakpoints, precision=6)}")
        for i in range(len(self.worst_upper)):
            lines.append(f"  species {i + 1}: worst upper margin {self.worst_upper[i]:+.3e}"
                         f" (need <= 0), worst lower margin {self.worst_lower[i]:+.3e} (need >= 0)")
        if self.violations:
            lines.append(f"  VIOLATIONS ({len(self.violations)}):")
            for side, i, xi, val in self.violations[:20]:
                lines.append(f"    {side} species {i + 1} at xi = {xi:.6g}: {val:+.3e}")
            if len(self.violations) > 20:
                lines.append(f"    ... {len(self.violations) - 20} more")
        else:
            lines.append("  all inequalities hold")
        return "\n".join(lines)


def _delayed_average(model, pair, source, i, j, xi):
    """Atom sum of source_j(xi + c s) against the delay-only part of kernel
    (i, j): diagonal kernels drop their instantaneous atom (handled by the
    separated a_i term)."""
    kern = model.kernels[i][j]
    if i == j:
        _, atoms = kern.diagonal_split()
    else:
        atoms = kern.atoms
    acc = np.zeros_like(np.asarray(xi, dtype=float))
    for s, w in atoms:
        acc = acc + w * source(j, xi + pair.speed * s)
    return acc


def verify_bound_inequalities(pair: BoundPair, model: LotkaVolterraModel,
                              c: float | None = None, grid: np.ndarray | None = None,
                              exclusion: float | None = None, tol: float = 1e-9) -> BoundReport:
    """Evaluate both differential inequalities analytically on a grid.

    Upper check per species i (must be <= 0 off the corner set):
        d_i u'' - c u' + r_i u [1 - c_ii a_i u - sum_j c_ij <lower_j>]
    Lower check (must be >= 0) swaps the roles of the two profiles.  Grid
    points within `exclusion` of any corner are skipped (the inequalities
    only constrain smooth points); default exclusion is the grid spacing.
    """
    c = pair.speed if c is None else c
    if grid is None:
        lo = min(pair.breakpoints.min(), min(pair.lower_peak(i)[0] for i in range(pair.n)))
        hi = max(pair.breakpoints.max(), 0.0)
        span = hi - lo
        grid = np.linspace(lo - 0.35 * span - 1.0, hi + 0.35 * span + 1.0, 4001)
    grid = np.asarray(grid, dtype=float)
    if exclusion is None:
        exclusion = grid[1] - grid[0] if len(grid) > 1 else 1e-6
    keep = np.ones(len(grid), dtype=bool)
    for b in pair.breakpoints:
        keep &= np.abs(grid - b) > exclusion
    grid = grid[keep]

    a = model.a
    worst_upper = np.full(pair.n, -math.inf)
    worst_lower = np.full(pair.n, math.inf)
    violations: list[tuple[str, int, float, float]] = []
    for i in range(pair.n):
        ri, di, cii = model.r[i], model.d[i], model.c[i][i]
        up0, up1, up2 = (pair.upper(i, grid, k) for k in range(3))
        lo0, lo1, lo2 = (pair.lower(i, grid, k) for k in range(3))

        low_avg = sum(model.c[i][j] * _delayed_average(model, pair, pair.lower, i, j, grid)
                      for j in range(pair.n))
        lhs_up = di * up2 - c * up1 + ri * up0 * (1.0 - cii * a[i] * up0 - low_avg)

        up_avg = sum(model.c[i][j] * _delayed_average(model, pair, pair.upper, i, j, grid)
                     for j in range(pair.n))
        lhs_lo = di * lo2 - c * lo1 + ri * lo0 * (1.0 - cii * a[i] * lo0 - up_avg)

        worst_upper[i] = lhs_up.max()
        worst_lower[i] = lhs_lo.min()
        for k in np.nonzero(lhs_up > tol)[0]:
            violations.append(("upper", i, float(grid[k]), float(lhs_up[k])))
        for k in np.nonzero(lhs_lo < -tol)[0]:
            violations.append(("lower", i, float(grid[k]), float(lhs_lo[k])))

    return BoundReport(speed=c, eta=pair.eta, q=pair.q, gamma1=pair.gamma1,
                       worst_upper=worst_upper, worst_lower=worst_lower,
                       breakpoints=pair.breakpoints, violations=violations, tol=tol)
