"""Zero-noise extrapolation by per-gate unitary folding.

Every gate ``G`` becomes ``G (G^dag G)^n``, which leaves the ideal circuit
unchanged while multiplying its gate count, and hence its noise, by
``lambda = 1 + 2n``. Expectations measured at several ``lambda`` are
extrapolated to ``lambda = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .pauli import PauliString, PauliSum
from .simulator import Circuit, NoiseModel, estimate_expectation_sampled

MAX_DEGREE = 4


@dataclass(frozen=True)
class ZneConfig:
    fold_counts: tuple[int, ...] = (0, 1, 2, 3, 4)
    shots: int = 10_000
    seed: int | None = None
    degree: int | None = None  # None: full Richardson (points - 1), capped at MAX_DEGREE

    def __post_init__(self):
        counts = tuple(int(c) for c in self.fold_counts)
        object.__setattr__(self, "fold_counts", counts)
        if len(counts) < 2:
            raise InvalidInputError("need at least two fold counts")
        if counts[0] != 0 or any(b <= a for a, b in zip(counts, counts[1:])):
            raise InvalidInputError("fold counts must start at 0 and strictly increase")
        if self.shots < 1:
            raise InvalidInputError("shots must be >= 1")
        if self.degree is not None and not 1 <= self.degree <= len(counts) - 1:
            raise InvalidInputError("degree must be between 1 and points - 1")

    @property
    def scales(self) -> list[int]:
        return [1 + 2 * n for n in self.fold_counts]

    @property
    def fit_degree(self) -> int:
        deg = len(self.fold_counts) - 1 if self.degree is None else self.degree
        return min(deg, MAX_DEGREE)


def fold_circuit(c: Circuit, n: int) -> Circuit:
    """Replace each gate ``G`` with ``G`` followed by ``n`` copies of ``G^dag, G``."""
    if n < 0:
        raise InvalidInputError("fold count must be >= 0")
    out = Circuit(c.n_qubits)
    for g in c:
        inv = g.inverse()
        out.append(g)
        for _ in range(n):
            out.append(inv)
            out.append(g)
    return out


def richardson_extrapolate(points: Sequence[tuple[float, float]], degree: int | None = None
                           ) -> float:
    """Value at ``lambda = 0`` of the polynomial through ``points``.

    With the default ``degree`` (``len(points) - 1``) this is the exact
    interpolant, evaluated through Lagrange weights. A lower degree gives the
    least-squares fit instead, which is less prone to amplifying noise.
    """
    if len(points) < 2:
        raise InvalidInputError("need at least two points")
    lam = np.array([float(p[0]) for p in points])
    val = np.array([float(p[1]) for p in points])
    if len(np.unique(lam)) != len(lam):
        raise InvalidInputError("duplicate noise scales")
    if degree is not None and degree < len(points) - 1:
        if degree < 0:
            raise InvalidInputError("degree must be >= 0")
        return float(np.polynomial.polynomial.polyfit(lam, val, degree)[0])
    return float(richardson_weights(lam) @ val)


def richardson_weights(lams: Sequence[float]) -> np.ndarray:
    """Lagrange basis polynomials evaluated at zero."""
    lams = np.asarray(lams, dtype=float)
    w = np.ones(len(lams))
    for i, li in enumerate(lams):
        for j, lj in enumerate(lams):
            if i != j:
                w[i] *= lj / (lj - li)
    return w


def scaled_expectations(prep: Circuit, obs: PauliSum, noise: NoiseModel, cfg: ZneConfig,
                        initial_state: np.ndarray | None = None,
                        grouping: Sequence[Sequence[PauliString]] | None = None,
                        seed=None) -> list[tuple[int, float]]:
    """Noisy estimates of ``<obs>`` at each noise scale, as ``(lambda, value)`` pairs.

    Measurement basis changes are appended after folding and are not folded.
    """
    seed = cfg.seed if seed is None else seed
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(len(cfg.fold_counts))
    out = []
    for n, child in zip(cfg.fold_counts, children):
        folded = fold_circuit(prep, n)
        val = estimate_expectation_sampled(folded, obs, cfg.shots, grouping, noise, child,
                                           initial_state=initial_state)
        out.append((1 + 2 * n, val))
    return out


def mitigated_expectation(prep: Circuit, obs: PauliSum, noise: NoiseModel, cfg: ZneConfig,
                          initial_state: np.ndarray | None = None,
                          grouping: Sequence[Sequence[PauliString]] | None = None,
                          seed=None, return_points: bool = False):
    """Richardson-extrapolated estimate of ``<obs>`` under ``noise``."""
    points = scaled_expectations(prep, obs, noise, cfg, initial_state, grouping, seed)
    value = richardson_extrapolate(points, cfg.fit_degree)
    return (value, points) if return_points else value
