"""Discrete delay measures on [-tau, 0].

A delay kernel is a probability measure written as a finite list of atoms
(location, weight) with locations in [-tau, 0] and total weight 1.  Point
delays, several discrete delays, and continuous delay densities (discretized
at ingestion by midpoint quadrature) are all covered by the same
representation, so every weighted history average downstream is an exact
finite sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["DelayKernel", "KernelError"]

# weights must sum to 1 within this
_MASS_TOL = 1e-12


class KernelError(ValueError):
    """Invalid kernel construction (location outside [-tau, 0], bad mass...)."""


def _coalesce(atoms: Iterable[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    """Sort atoms by location and merge locations closer than tol."""
    merged: list[list[float]] = []
    for s, w in sorted(atoms):
        if merged and abs(s - merged[-1][0]) <= tol:
            merged[-1][1] += w
        else:
            merged.append([s, w])
    return [(s, w) for s, w in merged]


@dataclass(frozen=True)
class DelayKernel:
    """Probability measure on [-tau, 0] given by atoms ((s_1, w_1), ...).

    Invariants (enforced at construction): -tau <= s_k <= 0, strictly
    increasing locations, strictly positive weights summing to 1.
    tau = 0 is allowed and forces the single atom location 0 (the
    undelayed limit).
    """

    atoms: tuple[tuple[float, float], ...]
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise KernelError(f"tau must be >= 0, got {self.tau}")
        if not self.atoms:
            raise KernelError("kernel needs at least one atom")
        locs = [s for s, _ in self.atoms]
        wts = [w for _, w in self.atoms]
        slack = 1e-12 * max(self.tau, 1.0)
        for s in locs:
            if s < -self.tau - slack or s > slack:
                raise KernelError(f"atom location {s} outside [-{self.tau}, 0]")
        if any(np.diff(locs) <= 0):
            raise KernelError("atom locations must be strictly increasing")
        if any(w <= 0 for w in wts):
            raise KernelError("atom weights must be strictly positive")
        if abs(sum(wts) - 1.0) > _MASS_TOL:
            raise KernelError(f"atom weights sum to {sum(wts)}, expected 1")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[float, float]], tau: float | None = None) -> "DelayKernel":
        """Build a kernel from (location, weight) pairs.

        Locations closer than 1e-12*max(tau,1) are merged (weights added),
        which absorbs duplicate atoms introduced by config round-trips.
        """
        if tau is None:
            tau = max((-s for s, _ in atoms), default=0.0)
            tau = max(tau, 0.0)
        clean = _coalesce(atoms, 1e-12 * max(tau, 1.0))
        return cls(tuple(clean), float(tau))

    @classmethod
    def point_mass(cls, s: float, tau: float | None = None) -> "DelayKernel":
        """Single unit atom at s (s in [-tau, 0]); the instantaneous case is s = 0."""
        if s > 0:
            raise KernelError(f"point mass location must be <= 0, got {s}")
        if tau is None:
            tau = max(-s, 0.0)
        if s < -tau:
            raise KernelError(f"point mass location {s} below -tau = {-tau}")
        return cls(((float(s), 1.0),), float(tau))

    @classmethod
    def uniform_quadrature(cls, tau: float, n_atoms: int) -> "DelayKernel":
        """Midpoint discretization of the uniform density on [-tau, 0].

        n_atoms equally weighted atoms at the midpoints of an equipartition.
        """
        if tau <= 0:
            raise KernelError(f"uniform kernel needs tau > 0, got {tau}")
        if n_atoms < 1:
            raise KernelError(f"need at least one atom, got {n_atoms}")
        edges = np.linspace(-tau, 0.0, n_atoms + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        w = 1.0 / n_atoms
        return cls(tuple((float(s), w) for s in mids), float(tau))

    # -- queries -----------------------------------------------------------

    @property
    def locations(self) -> np.ndarray:
        return np.array([s for s, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def stieltjes(self, g: Callable[[float], float]):
        """Integrate g against the kernel: sum_k w_k g(s_k).

        Exact for the discrete measure.  g may return scalars or arrays
        (all atom evaluations must broadcast together).
        """
        acc = None
        for s, w in self.atoms:
            term = w * np.asarray(g(s))
            acc = term if acc is None else acc + term
        return acc if acc.ndim else float(acc)

    def diagonal_split(self) -> tuple[float, tuple[tuple[float, float], ...]]:
        """Split off the instantaneous atom.

        Returns (a, remainder): a is the weight at s = 0 (0 if absent) and
        remainder holds every other atom with its original weight, total
        mass 1 - a.  remainder is a plain atom tuple rather than a
        DelayKernel because kernels proper always carry mass 1.
        """
        slack = 1e-12 * max(self.tau, 1.0)
        a = 0.0
        rest: list[tuple[float, float]] = []
        for s, w in self.atoms:
            if abs(s) <= slack:
                a += w
            else:
                rest.append((s, w))
        return a, tuple(rest)
