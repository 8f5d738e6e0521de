"""Variational eigensolver with the XY-ansatz.

Besides the plain ground-state search this module has the folded-spectrum
variant (minimize ``<(H - w)^2>``) with a sweep over ``w``, and deflation with
an overlap penalty. Costs can be exact, shot-sampled, noisy, or noisy with
zero-noise extrapolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import InconsistencyError, InvalidInputError
from .pauli import DENSE_QUBIT_CAP, PauliString, PauliSum, eigen_range_bounds, square_shifted
from .simulator import (Circuit, NoiseModel, apply_circuit, estimate_expectation_sampled,
                        expectation, group_outcome_counts, zero_state)
from .trotter_qpe import pauli_exponential


# --- ansatz -------------------------------------------------------------------

@dataclass(frozen=True)
class XyAnsatz:
    """XY-ansatz on ``n_spins`` qubits.

    ``factors`` lists ``((p, q), axes)`` in the order the gates act (the
    rightmost operator factor first); parameter ``i`` belongs to factor ``i``.
    ``p`` and ``q`` are 1-based spin labels, ``axes`` the Pauli string of the
    generator ``sigma_p^y sigma_q^x`` (times ``sigma_N^z`` when neither index
    is ``N``).
    """

    n_spins: int
    factors: tuple[tuple[tuple[int, int], str], ...]

    @property
    def n_params(self) -> int:
        return len(self.factors)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [pq for pq, _ in self.factors]

    def circuit(self, theta: Sequence[float]) -> Circuit:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise InvalidInputError(
                f"expected {self.n_params} parameters, got shape {theta.shape}")
        c = Circuit(self.n_spins)
        for (_, axes), th in zip(self.factors, theta):
            c.extend(pauli_exponential(axes, float(th), style="rotation"))
        return c

    def state(self, theta: Sequence[float], initial_state: np.ndarray) -> np.ndarray:
        return apply_circuit(initial_state, self.circuit(theta))


def _generator(p: int, q: int, n: int) -> str:
    axes = ["I"] * n
    axes[p - 1] = "Y"
    axes[q - 1] = "X"
    if n not in (p, q):
        axes[n - 1] = "Z"
    return "".join(axes)


def xy_ansatz(n: int) -> XyAnsatz:
    if n < 2:
        raise InvalidInputError("the XY-ansatz needs at least two spins")
    pairs = [(l, k) for l in range(n - 1, 0, -1) for k in range(n, l, -1)]
    product = [(lk, _generator(*lk, n)) for lk in pairs]
    product += [((k, l), _generator(k, l, n)) for (l, k) in pairs]
    return XyAnsatz(n, tuple(reversed(product)))


def build_xy_ansatz(n: int, theta: Sequence[float]) -> Circuit:
    """Circuit of the ``n``-spin XY-ansatz at parameters ``theta`` (length ``n(n-1)``)."""
    return xy_ansatz(n).circuit(theta)


# --- grouping -----------------------------------------------------------------

def qubitwise_commute(a: str, b: str) -> bool:
    return all(x == "I" or y == "I" or x == y for x, y in zip(a, b))


def group_terms(h: PauliSum) -> list[list[PauliString]]:
    """Greedy first-fit partition of the non-identity terms into qubit-wise commuting groups."""
    groups: list[list[PauliString]] = []
    for term in h:
        if term.is_identity:
            continue
        for g in groups:
            if all(qubitwise_commute(term.axes, other.axes) for other in g):
                g.append(term)
                break
        else:
            groups.append([term])
    return groups


# --- optimization -------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    """Derivative-free optimizer settings.

    ``tol`` is the final trust-region radius for COBYLA (a parameter-space
    tolerance, in radians) and ``xatol``/``fatol`` for the Nelder-Mead fallback.
    """

    method: str = "COBYLA"
    max_iterations: int = 500
    initial_step: float = 0.5
    tol: float = 1e-8
    fallback: str | None = "Nelder-Mead"
    seed: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be positive")
        if not (self.initial_step > 0 and self.tol > 0):
            raise InvalidInputError("initial_step and tol must be positive")
        if self.method not in ("COBYLA", "Nelder-Mead"):
            raise InvalidInputError(f"unsupported optimizer {self.method!r}")


@dataclass
class VqeResult:
    eigenvalue: float
    theta_star: np.ndarray
    eigenvector: np.ndarray
    cost: float
    cost_history: list[float]      # best cost so far after each evaluation
    evaluations: int
    converged: bool
    energy: float = math.nan       # exact <H> at theta_star
    w: float | None = None
    consistent: bool = True
    verified: bool | None = None
    raw_costs: list[float] = field(default_factory=list)
    message: str = ""


def _cost_function(h: PauliSum, ansatz: XyAnsatz, initial_state: np.ndarray,
                   prep: Circuit | None, shots: int | None, noise: NoiseModel | None,
                   mitigation, seed):
    """Return ``f(theta)`` for the requested evaluation mode."""
    grouping = group_terms(h)
    if shots is None and noise is None and mitigation is None:
        def exact(theta):
            return expectation(ansatz.state(theta, initial_state), h)
        return exact

    def circuit_and_start(theta):
        circ = ansatz.circuit(theta)
        if prep is not None:
            return prep + circ, zero_state(ansatz.n_spins)
        return circ, initial_state

    shots = 10_000 if shots is None else shots
    if mitigation is not None:
        from .zne import mitigated_expectation

        def mitigated(theta):
            circ, start = circuit_and_start(theta)
            return mitigated_expectation(circ, h, noise or NoiseModel(), mitigation,
                                         initial_state=start, grouping=grouping, seed=seed)
        return mitigated

    def sampled(theta):
        # same seed at every evaluation: common random numbers across theta
        circ, start = circuit_and_start(theta)
        return estimate_expectation_sampled(circ, h, shots, grouping, noise, seed,
                                            initial_state=start)
    return sampled


def _optimize(fun, theta0: np.ndarray, cfg: OptimizerConfig):
    history, raw = [], []
    best = [math.inf, theta0.copy()]

    def tracked(theta):
        val = float(fun(theta))
        raw.append(val)
        if val < best[0]:
            best[0], best[1] = val, np.array(theta, dtype=float)
        history.append(best[0])
        return val

    def run(method, x0, budget):
        if method == "COBYLA":
            return minimize(tracked, x0, method="COBYLA",
                            options={"rhobeg": cfg.initial_step, "tol": cfg.tol,
                                     "maxiter": budget})
        simplex = np.vstack([x0] + [x0 + cfg.initial_step * e for e in np.eye(len(x0))])
        return minimize(tracked, x0, method="Nelder-Mead",
                        options={"initial_simplex": simplex, "xatol": cfg.tol,
                                 "fatol": 1e-12, "maxfev": budget})

    res = run(cfg.method, theta0, cfg.max_iterations)
    converged = bool(res.success) and len(raw) < cfg.max_iterations
    message = str(res.message)
    left = cfg.max_iterations - len(raw)
    if not converged and cfg.fallback and cfg.fallback != cfg.method and left > 0:
        res = run(cfg.fallback, best[1].copy(), left)
        converged = bool(res.success) and len(raw) < cfg.max_iterations
        message += f"; fallback {cfg.fallback}: {res.message}"
    return best[1], best[0], history, raw, converged, message


def _prepare_initial(n: int, initial_state, prep: Circuit | None) -> np.ndarray:
    if initial_state is not None:
        state = np.asarray(initial_state, dtype=complex)
        if state.shape != (1 << n,):
            raise InvalidInputError("initial state has the wrong size")
        return state / np.linalg.norm(state)
    if prep is not None:
        return apply_circuit(zero_state(n), prep)
    return zero_state(n)


def vqe_minimize(h: PauliSum, ansatz: XyAnsatz | None = None, initial_state=None,
                 theta0=None, cfg: OptimizerConfig | None = None, shots: int | None = None,
                 noise: NoiseModel | None = None, mitigation=None,
                 prep: Circuit | None = None, seed=None) -> VqeResult:
    """Minimize ``<psi(theta)|h|psi(theta)>``.

    Exact mode (``shots``, ``noise`` and ``mitigation`` all None) uses the
    statevector expectation. Otherwise every evaluation is sampled with
    ``shots`` per measurement group (default 10^4), reusing ``seed`` so that
    the cost surface is a fixed function of theta. If ``prep`` is given the
    sampled circuits start from ``|0...0>`` and run it first; otherwise
    ``initial_state`` is loaded directly.
    """
    cfg = cfg or OptimizerConfig()
    n = h.n_qubits
    ansatz = ansatz or xy_ansatz(n)
    if ansatz.n_spins != n:
        raise InvalidInputError("ansatz and Hamiltonian sizes differ")
    start = _prepare_initial(n, initial_state, prep)
    theta0 = np.zeros(ansatz.n_params) if theta0 is None else np.asarray(theta0, dtype=float)
    if theta0.shape != (ansatz.n_params,):
        raise InvalidInputError(f"theta0 must have {ansatz.n_params} entries")
    seed = cfg.seed if seed is None else seed
    fun = _cost_function(h, ansatz, start, prep, shots, noise, mitigation, seed)
    theta, cost, hist, raw, converged, msg = _optimize(fun, theta0, cfg)
    vec = ansatz.state(theta, start)
    return VqeResult(cost, theta, vec, cost, hist, len(raw), converged,
                     energy=expectation(vec, h), raw_costs=raw, message=msg)


def folded_vqe(h: PauliSum, w: float, ansatz: XyAnsatz | None = None, initial_state=None,
               theta0=None, cfg: OptimizerConfig | None = None, shots: int | None = None,
               noise: NoiseModel | None = None, mitigation=None, prep: Circuit | None = None,
               seed=None, negative_tol: float | None = None,
               consistency_tol: float = 1.0) -> VqeResult:
    """Eigenvalue nearest ``w`` from the minimum of ``<(H - w)^2>``.

    The reported value is ``w + sqrt(cost)`` for ``w >= 0`` and
    ``w - sqrt(cost)`` for ``w < 0``. That rule is only right when the target
    lies on the far side of ``w`` from zero, so the result also carries the
    exact energy ``<H>`` at the optimum and ``consistent`` says whether the two
    agree within ``consistency_tol`` rad/s.
    """
    obs = square_shifted(h, w)
    res = vqe_minimize(obs, ansatz, initial_state, theta0, cfg, shots, noise, mitigation,
                       prep, seed)
    cost = res.cost
    if negative_tol is None:
        scale = sum(abs(t.coeff) for t in obs)
        negative_tol = 1e-9 * scale if shots is None and noise is None else 0.05 * scale
    if cost < -negative_tol:
        raise InconsistencyError(f"folded cost {cost:.6g} is negative beyond tolerance")
    root = math.sqrt(max(cost, 0.0))
    res.eigenvalue = w + root if w >= 0 else w - root
    res.energy = expectation(res.eigenvector, h)
    res.w = float(w)
    res.consistent = abs(res.eigenvalue - res.energy) <= consistency_tol
    return res


def w_grid(h: PauliSum, divisions: int = 16) -> np.ndarray:
    lo, hi = eigen_range_bounds(h)
    return np.linspace(lo, hi, divisions + 1)


def w_sweep(h: PauliSum, initial_states: Sequence[np.ndarray], ws: Sequence[float] | None = None,
            merge_tol: float = 1.0, **kwargs) -> list[VqeResult]:
    """Folded VQE over a grid of ``w`` and several start states.

    Only consistent results are kept; results within ``merge_tol`` rad/s are
    merged, keeping the one whose sign-rule value best matches its energy.
    Returned in ascending eigenvalue order.
    """
    ws = w_grid(h) if ws is None else ws
    kept: list[VqeResult] = []
    for state in initial_states:
        for w in ws:
            try:
                r = folded_vqe(h, float(w), initial_state=state, **kwargs)
            except InconsistencyError:
                continue
            if not r.consistent:
                continue
            for i, k in enumerate(kept):
                if abs(k.eigenvalue - r.eigenvalue) <= merge_tol:
                    if abs(r.eigenvalue - r.energy) < abs(k.eigenvalue - k.energy):
                        kept[i] = r
                    break
            else:
                kept.append(r)
    kept.sort(key=lambda r: r.eigenvalue)
    return kept


# --- overlaps and deflation ---------------------------------------------------

def overlap_estimate(theta_a, theta_b, ansatz: XyAnsatz, prep: Circuit | None = None,
                     shots: int | None = None, seed=None, initial_state=None,
                     noise: NoiseModel | None = None) -> float:
    """``|<psi(a)|psi(b)>|^2``: exact, or the all-zeros frequency after ``P, A(b), A(a)^dag, P^dag``."""
    n = ansatz.n_spins
    if shots is None:
        start = _prepare_initial(n, initial_state, prep)
        va, vb = ansatz.state(theta_a, start), ansatz.state(theta_b, start)
        return float(abs(np.vdot(va, vb)) ** 2)
    if prep is None:
        raise InvalidInputError("sampled overlaps need a preparation circuit")
    circ = prep + ansatz.circuit(theta_b) + ansatz.circuit(theta_a).inverse() + prep.inverse()
    counts = group_outcome_counts(circ, zero_state(n), shots, noise, np.random.default_rng(seed))
    return float(counts[0] / shots)


def deflation_vqe(h: PauliSum, k: int, betas: Sequence[float] | None = None,
                  ansatz: XyAnsatz | None = None, initial_state=None, theta0=None,
                  cfg: OptimizerConfig | None = None, shots: int | None = None,
                  prep: Circuit | None = None, seed=None, verify_tol: float = 1.0
                  ) -> list[VqeResult]:
    """Levels ``0..k-1`` by minimizing ``<H> + sum_i beta_i |<psi|psi_i>|^2``.

    Default ``beta_i`` is the width of the trace-based eigenvalue bracket.
    Level ``j`` is ``verified`` when its energy is within ``verify_tol`` of the
    ``j``-th smallest exact eigenvalue (dense oracle, small systems only).
    """
    from .exact_diag import eigen_decompose

    cfg = cfg or OptimizerConfig()
    n = h.n_qubits
    ansatz = ansatz or xy_ansatz(n)
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    if betas is None:
        lo, hi = eigen_range_bounds(h)
        betas = [hi - lo] * (k - 1)
    betas = list(betas)
    if len(betas) < k - 1 or any(b <= 0 for b in betas):
        raise InvalidInputError("need k-1 positive penalty weights")
    start = _prepare_initial(n, initial_state, prep)
    theta0 = np.zeros(ansatz.n_params) if theta0 is None else np.asarray(theta0, dtype=float)
    oracle = eigen_decompose(h).eigenvalues if n <= DENSE_QUBIT_CAP else None
    seed = cfg.seed if seed is None else seed
    base = _cost_function(h, ansatz, start, prep, shots, None, None, seed)
    results: list[VqeResult] = []
    for level in range(k):
        found = [r.theta_star for r in results]

        def cost(theta, found=found):
            val = base(theta)
            for beta, th in zip(betas, found):
                val += beta * overlap_estimate(theta, th, ansatz, prep, shots, seed, start)
            return val

        theta, best, hist, raw, converged, msg = _optimize(cost, theta0.copy(), cfg)
        vec = ansatz.state(theta, start)
        energy = expectation(vec, h)
        verified = None if oracle is None else bool(abs(energy - oracle[level]) <= verify_tol)
        results.append(VqeResult(energy, theta, vec, best, hist, len(raw), converged,
                                 energy=energy, verified=verified, raw_costs=raw, message=msg))
    return results


def amplitude_confinement(ansatz: XyAnsatz, theta, state: np.ndarray,
                          indices: Sequence[int]) -> float:
    """Total probability the ansatz puts on ``indices`` starting from ``state``."""
    out = ansatz.state(theta, state)
    return float(np.sum(np.abs(out[list(indices)]) ** 2))
