"""Pilot-based channel estimators: full-band LS, delay-aware LS, and greedy
matching pursuit over a delay dictionary with optional binary-search delay
refinement.

All estimators return an :class:`EstimateResult` holding the reconstructed
K-subcarrier frequency response plus per-run diagnostics.  Least-squares
solves go through a rank-revealing SVD (``numpy.linalg.lstsq``) with a
relative singular-value cutoff of 1e-10; anything below that counts as a
degenerate column set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import PulseConfig, pulse_matrix, pulse_vector
from .exceptions import (
    ConfigurationError,
    DegenerateDictionaryError,
    DimensionError,
)
from .ofdm import PilotObservation, dft_submatrix, pilot_submatrix, sensing_matrix

_RCOND = 1e-10
# Collision tolerance for refined delays, in units of the sample period.
_COLLISION_TOL = 1e-6
# Relative floor on the stop threshold so noiseless runs terminate once the
# residual is numerical dust rather than running to max_iters.
_XI_FLOOR = 1e-20


@dataclass(frozen=True)
class DictionaryConfig:
    """Delay dictionary and stop rule for the greedy estimator.

    ``num_atoms`` candidate delays span the design delay spread ``M*T``
    uniformly.  ``xi`` is the residual-power stop threshold; ``None`` means
    ``N * sigma2`` of the observation at hand (noise variance assumed known).
    ``max_iters`` defaults to ``min(M, N) // 2`` to keep the per-iteration
    least squares overdetermined.
    """

    num_atoms: int = 128
    refine: bool = False
    refine_iters: int = 10
    xi: float | None = None
    max_iters: int | None = None

    def __post_init__(self):
        if int(self.num_atoms) != self.num_atoms or self.num_atoms < 1:
            raise ConfigurationError("num_atoms must be a positive integer")
        if self.refine and self.refine_iters < 1:
            raise ConfigurationError("refine_iters must be >= 1 when refining")
        if self.xi is not None and self.xi < 0:
            raise ConfigurationError("xi must be non-negative")
        if self.max_iters is not None and self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")


@dataclass(eq=False)
class EstimateResult:
    """Estimated frequency-domain channel plus per-run diagnostics.

    ``delays``/``gains`` list the recovered support (empty for the full-band
    estimator), ``iterations`` counts the recovered components, and
    ``residual_trace`` records the residual power starting from the raw
    observation.  ``truncated`` flags runs stopped by the iteration cap
    instead of the residual threshold.
    """

    h_freq: np.ndarray
    delays: np.ndarray = field(default_factory=lambda: np.empty(0))
    gains: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.complex128))
    iterations: int = 0
    residual_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    truncated: bool = False

    def __post_init__(self):
        self.h_freq = np.asarray(self.h_freq, dtype=np.complex128).ravel()
        self.delays = np.asarray(self.delays, dtype=np.float64).ravel()
        self.gains = np.asarray(self.gains, dtype=np.complex128).ravel()
        self.residual_trace = np.asarray(self.residual_trace, dtype=np.float64).ravel()
        if not len(self.delays) == len(self.gains) == self.iterations:
            raise DimensionError("delays, gains and iterations must agree")

    def to_json_dict(self) -> dict:
        return {
            "iterations": int(self.iterations),
            "truncated": bool(self.truncated),
            "delays_s": [float(t) for t in self.delays],
            "gains": [[g.real, g.imag] for g in self.gains],
            "residual_trace": [float(r) for r in self.residual_trace],
            "h_freq": [[v.real, v.imag] for v in self.h_freq],
        }


def _lstsq(A: np.ndarray, y: np.ndarray):
    """Least-squares solve returning (solution, numerical rank)."""
    solution, _, rank, _ = np.linalg.lstsq(A, y, rcond=_RCOND)
    return solution, rank


def ml_full(obs: PilotObservation) -> EstimateResult:
    """Least-squares estimate of all M taps, no sparsity assumed.

    The tap estimate is lifted back to the K subcarriers with the tall DFT
    submatrix.  Error variance with unit pilots: ``(M/N) * sigma2`` per
    subcarrier, independent of the channel.
    """
    cfg = obs.config
    if cfg.N < cfg.M:
        raise DimensionError("underdetermined: fewer pilots than taps")
    A = sensing_matrix(cfg)
    h_taps, rank = _lstsq(A, obs.y)
    if rank < cfg.M:
        raise DegenerateDictionaryError("pilot observation operator is rank-deficient")
    residual = float(np.sum(np.abs(obs.y - A @ h_taps) ** 2))
    h_freq = dft_submatrix(cfg.K, cfg.M) @ h_taps
    return EstimateResult(h_freq=h_freq, residual_trace=np.array([residual]))


def ml_genie(
    obs: PilotObservation,
    true_delays: np.ndarray,
    pulse: PulseConfig,
) -> EstimateResult:
    """Least-squares gains for a known delay set (an oracle benchmark).

    With the true delays handed over, only L complex gains remain to be
    estimated and the error variance drops to ``(L/N) * sigma2``.
    """
    cfg = obs.config
    true_delays = np.asarray(true_delays, dtype=np.float64).ravel()
    L = len(true_delays)
    if L < 1:
        raise DimensionError("need at least one delay")
    if L > cfg.N:
        raise DimensionError("more delays than pilots")
    P = pulse_matrix(pulse, true_delays)
    B = sensing_matrix(cfg) @ P
    gains, rank = _lstsq(B, obs.y)
    if rank < L:
        raise DegenerateDictionaryError("delay set produces a rank-deficient system")
    residual = float(np.sum(np.abs(obs.y - B @ gains) ** 2))
    h_freq = dft_submatrix(cfg.K, cfg.M) @ (P @ gains)
    return EstimateResult(
        h_freq=h_freq,
        delays=true_delays,
        gains=gains,
        iterations=L,
        residual_trace=np.array([residual]),
    )


@lru_cache(maxsize=8)
def _dictionary(K: int, N: int, M: int, pulse: PulseConfig, num_atoms: int):
    """Candidate delays and their pilot-domain atoms (cached, read-only)."""
    spread = M * pulse.sample_period
    taus = np.arange(num_atoms) * (spread / num_atoms)
    atoms = pilot_submatrix(K, N, M, orthonormal=False) @ pulse_matrix(pulse, taus)
    taus.setflags(write=False)
    atoms.setflags(write=False)
    return taus, atoms


def refine_delay(
    coarse_tau: float,
    bin_width: float,
    residual: np.ndarray,
    pulse: PulseConfig,
    pilot_matrix: np.ndarray,
    refine_iters: int = 10,
) -> float:
    """Binary-search the delay inside one dictionary bin.

    Maximizes ``|p(tau)^H F^H r|`` over ``tau`` in
    ``[coarse_tau - bin/2, coarse_tau + bin/2]`` assuming the objective is
    locally concave and symmetric around its peak: each step compares the two
    half-interval midpoints and keeps the better half.  The returned delay is
    always inside the bin and its objective is never below the bin center's,
    so refinement cannot do worse than the coarse decision.
    """
    residual = np.asarray(residual).ravel()

    def objective(mu: float) -> float:
        atom = pilot_matrix @ pulse_vector(pulse, coarse_tau + mu * bin_width)
        return abs(np.vdot(atom, residual))

    best_mu = 0.0
    best_val = objective(0.0)
    lo, hi = -0.5, 0.5
    for _ in range(refine_iters):
        mid = 0.5 * (lo + hi)
        left = 0.5 * (lo + mid)
        right = 0.5 * (mid + hi)
        f_left = objective(left)
        f_right = objective(right)
        if f_left > best_val:
            best_mu, best_val = left, f_left
        if f_right > best_val:
            best_mu, best_val = right, f_right
        if f_left >= f_right:
            hi = mid
        else:
            lo = mid
    center = 0.5 * (lo + hi)
    if objective(center) > best_val:
        best_mu = center
    return coarse_tau + best_mu * bin_width


def omp(
    obs: PilotObservation,
    dictionary: DictionaryConfig,
    pulse: PulseConfig,
) -> EstimateResult:
    """Greedy sparse estimation over a uniform delay dictionary.

    Per iteration: pick the unused atom best correlated with the residual
    (ties break toward the lowest index), optionally refine its delay inside
    the bin via :func:`refine_delay`, re-solve the least squares on the grown
    support, and update the residual.  Stops once the residual power is at or
    below the threshold or the iteration cap is hit (the result is then
    flagged ``truncated``).

    Refined delays that collide with the existing support (within 1e-6 sample
    periods) cause the next-best coarse atom to be tried instead; atoms whose
    inclusion makes the support rank-deficient are skipped with a warning.
    """
    cfg = obs.config
    if dictionary.num_atoms < cfg.M:
        raise ConfigurationError("dictionary must have at least M atoms")
    max_iters = dictionary.max_iters
    if max_iters is None:
        max_iters = max(1, min(cfg.M, cfg.N) // 2)
    if max_iters > cfg.N:
        raise ConfigurationError("max_iters may not exceed the pilot count")
    xi = dictionary.xi
    if xi is None:
        xi = cfg.N * obs.noise_variance

    taus, atoms = _dictionary(cfg.K, cfg.N, cfg.M, pulse, dictionary.num_atoms)
    pilots = cfg.pilots
    if cfg.pilot_values is not None:
        atoms = pilots[:, None] * atoms
    S = sensing_matrix(cfg)
    bin_width = pulse.sample_period * cfg.M / dictionary.num_atoms

    y = obs.y
    y_power = float(np.sum(np.abs(y) ** 2))
    xi_eff = max(xi, _XI_FLOOR * y_power)

    residual = y.copy()
    trace = [y_power]
    used = np.zeros(dictionary.num_atoms, dtype=bool)
    support: list[float] = []
    support_matrix = np.empty((cfg.N, 0), dtype=np.complex128)
    gains = np.empty(0, dtype=np.complex128)
    truncated = False

    while trace[-1] > xi_eff:
        if len(support) >= max_iters:
            truncated = True
            break
        corr = np.abs(atoms.conj().T @ residual)
        corr[used] = -np.inf
        order = np.argsort(-corr, kind="stable")
        step_done = False
        for idx in order:
            if used[idx]:
                continue
            used[idx] = True
            tau_hat = float(taus[idx])
            if dictionary.refine:
                tau_hat = refine_delay(
                    tau_hat, bin_width, residual, pulse, S, dictionary.refine_iters
                )
            if support and np.min(np.abs(np.asarray(support) - tau_hat)) <= (
                _COLLISION_TOL * pulse.sample_period
            ):
                warnings.warn(
                    "refined delay collides with the existing support; "
                    "taking the next-best atom",
                    stacklevel=2,
                )
                continue
            candidate = np.column_stack(
                [support_matrix, S @ pulse_vector(pulse, tau_hat)]
            )
            solution, rank = _lstsq(candidate, y)
            if rank < candidate.shape[1]:
                warnings.warn(
                    "atom made the support rank-deficient; skipping it",
                    stacklevel=2,
                )
                continue
            support.append(tau_hat)
            support_matrix = candidate
            gains = solution
            residual = y - support_matrix @ gains
            trace.append(float(np.sum(np.abs(residual) ** 2)))
            step_done = True
            break
        if not step_done:
            # Dictionary exhausted without an admissible atom.
            truncated = trace[-1] > xi_eff
            break

    if support:
        P_hat = pulse_matrix(pulse, np.asarray(support))
        h_freq = dft_submatrix(cfg.K, cfg.M) @ (P_hat @ gains)
    else:
        h_freq = np.zeros(cfg.K, dtype=np.complex128)
    return EstimateResult(
        h_freq=h_freq,
        delays=np.asarray(support),
        gains=gains,
        iterations=len(support),
        residual_trace=np.asarray(trace),
        truncated=truncated,
    )


def omp_variance_bound(expected_l_hat: float, num_pilots: int, sigma2: float) -> float:
    """High-SNR error-variance floor of the greedy estimator.

    ``2 * E[L_hat] * sigma2 / N``: twice the delay-aware oracle's floor
    because stopping at the noise level leaves as much unexplained channel
    power as the gain-estimation noise adds.
    """
    if expected_l_hat <= 0 or num_pilots <= 0 or sigma2 <= 0:
        raise ConfigurationError("all inputs must be positive")
    return 2.0 * expected_l_hat * sigma2 / num_pilots
