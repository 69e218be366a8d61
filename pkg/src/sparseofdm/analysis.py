"""Error metrics and compressibility analysis of tap vectors.

The central object is the residual-power profile: after the ``d`` strongest
taps of a channel are accounted for, how much power (scaled by ``1/K``) is
still unexplained?  The profile's decay is bracketed by curves that depend
only on the Fairness Index of the remaining tap powers, and approximated by a
geometric progression that needs only the full vector's index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import DiscreteChannel
from .exceptions import ConfigurationError, DimensionError, UndefinedInputError

_CROSS_CHECK_TOL = 1e-12


def fairness_index(v: np.ndarray) -> float:
    """Jain-style power fairness index of a complex vector.

    ``(sum |v|^2)^2 / (M * sum |v|^4)``: 1 for equal magnitudes, ``1/M`` for a
    single nonzero entry, and invariant to scaling.
    """
    v = np.asarray(v).ravel()
    if len(v) == 0:
        raise DimensionError("empty vector")
    powers = np.abs(v) ** 2
    return _fi_of_powers(powers)


def _fi_of_powers(powers: np.ndarray) -> float:
    total = float(np.sum(powers))
    if total == 0.0:
        raise UndefinedInputError("fairness index of an all-zero vector is undefined")
    return total**2 / (len(powers) * float(np.sum(powers**2)))


def error_variance(h_true: np.ndarray, h_hat: np.ndarray) -> float:
    """Squared error between frequency responses, normalized per subcarrier."""
    h_true = np.asarray(h_true).ravel()
    h_hat = np.asarray(h_hat).ravel()
    if len(h_true) != len(h_hat):
        raise DimensionError("vectors must have equal length")
    return float(np.sum(np.abs(h_hat - h_true) ** 2)) / len(h_true)


@dataclass(frozen=True, eq=False)
class CompressibilityProfile:
    """Sorted tap powers with the residual-power curve and its FI bounds.

    Powers are those of the unit-power normalized channel copy (they sum to
    one).  All curves are indexed by ``d = 0 .. M`` (``M + 1`` points): entry
    ``d`` is the power left after the ``d`` strongest taps are removed,
    scaled by ``1/K``.  ``fi_residuals[d]`` is the Fairness Index of the tap powers
    remaining after removing the ``d`` strongest (``d = 0 .. M-1``); entries
    where the residual power is exactly zero are NaN and the bound curves
    truncate there as well.
    """

    sorted_powers: np.ndarray
    rho_bar: np.ndarray
    fi_full: float
    fi_residuals: np.ndarray
    bound_lower_fi: np.ndarray
    bound_upper_fi: np.ndarray
    bound_geometric: np.ndarray
    K: int

    @property
    def num_taps(self) -> int:
        return len(self.sorted_powers)

    def to_csv(self) -> str:
        lines = ["d,rho_bar,bound_lower_fi,bound_upper_fi,bound_geometric,fi_residual"]
        M = self.num_taps
        for d in range(M + 1):
            fi_r = self.fi_residuals[d] if d < M else float("nan")
            lines.append(
                f"{d},{self.rho_bar[d]:.12g},{self.bound_lower_fi[d]:.12g},"
                f"{self.bound_upper_fi[d]:.12g},{self.bound_geometric[d]:.12g},"
                f"{fi_r:.12g}"
            )
        return "\n".join(lines) + "\n"


def _sorted_powers(h: DiscreteChannel | np.ndarray) -> np.ndarray:
    taps = h.taps if isinstance(h, DiscreteChannel) else np.asarray(h).ravel()
    powers = np.abs(taps) ** 2
    if float(np.sum(powers)) == 0.0:
        raise UndefinedInputError("all-zero channel")
    return np.sort(powers)[::-1]


def _rho_bar_recursive(powers: np.ndarray, K: int) -> np.ndarray:
    """Recursive form of the residual-power curve (for cross-checking)."""
    M = len(powers)
    rho = np.empty(M + 1)
    rho[0] = float(np.sum(powers)) / K
    tail = float(np.sum(powers))
    for d in range(1, M + 1):
        rho[d] = rho[d - 1] * (1.0 - powers[d - 1] / tail) if tail > 0 else 0.0
        tail -= powers[d - 1]
    return rho


def rho_bar_profile(h: DiscreteChannel | np.ndarray, K: int) -> CompressibilityProfile:
    """Residual-power curve of a channel plus its FI-based bound curves.

    The curve is computed on the unit-power normalized copy of the channel,
    so it always starts at ``1/K``.  The closed form ``(1 - partial sums)/K``
    and the recursive peel-one-tap form are both evaluated and must agree to
    1e-12.
    """
    if K < 1:
        raise ConfigurationError("K must be a positive integer")
    powers = _sorted_powers(h)
    powers = powers / float(np.sum(powers))
    M = len(powers)

    # Reversed cumulative sums: exact zeros once the residual support is empty,
    # unlike "total minus partial sum" which leaves subtraction round-off.
    tail_power = np.cumsum(powers[::-1])[::-1]
    tail_square = np.cumsum((powers**2)[::-1])[::-1]
    total = float(tail_power[0])

    rho = np.concatenate([tail_power, [0.0]]) / K
    recursive = _rho_bar_recursive(powers, K)
    if np.max(np.abs(rho - recursive)) > _CROSS_CHECK_TOL * max(total / K, 1e-300):
        raise ArithmeticError("residual-power forms disagree beyond tolerance")

    # FI of the residual power set after removing the d strongest, d = 0..M-1.
    sizes = M - np.arange(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        fi_res = tail_power**2 / (sizes * tail_square)
    fi_res = np.where(tail_power > 0, fi_res, np.nan)

    scale = total / K
    with np.errstate(invalid="ignore"):
        factors_lower = 1.0 - 1.0 / np.sqrt(sizes * fi_res)
        factors_upper = 1.0 - 1.0 / (sizes * np.sqrt(fi_res))
    factors_lower = np.clip(factors_lower, 0.0, 1.0)
    factors_upper = np.clip(factors_upper, 0.0, 1.0)
    bound_lower = scale * np.concatenate([[1.0], np.cumprod(factors_lower)])
    bound_upper = scale * np.concatenate([[1.0], np.cumprod(factors_upper)])

    fi_full = _fi_of_powers(powers)
    bound_geometric = geometric_bound(fi_full, M, np.arange(M + 1), K) * total

    return CompressibilityProfile(
        sorted_powers=powers,
        rho_bar=rho,
        fi_full=fi_full,
        fi_residuals=fi_res,
        bound_lower_fi=bound_lower,
        bound_upper_fi=bound_upper,
        bound_geometric=bound_geometric,
        K=int(K),
    )


def fi_bounds(profile: CompressibilityProfile, d: int) -> tuple[float, float]:
    """Lower/upper envelope of the residual-power curve at depth ``d``.

    Products over ``i < d`` of ``1 - 1/sqrt((M-i) * FI(res_i))`` (lower) and
    ``1 - 1/((M-i) * sqrt(FI(res_i)))`` (upper), scaled by the total power
    over ``K``.  Returns ``(nan, nan)`` past the depth where the residual
    power hits zero.
    """
    M = profile.num_taps
    if not 0 <= d <= M:
        raise DimensionError(f"need 0 <= d <= {M}")
    return float(profile.bound_lower_fi[d]), float(profile.bound_upper_fi[d])


def geometric_bound(fi_full: float, M: int, d, K: int) -> float | np.ndarray:
    """Geometric-progression approximation of the residual-power decay.

    ``(1 - 1/sqrt(M * FI))^d / K`` for a unit-power vector.  Requires
    ``M * FI >= 1`` (always true of a valid Fairness Index).
    """
    scaled = M * fi_full
    if scaled < 1.0 - 1e-9:
        raise ConfigurationError("M * fi_full must be at least 1")
    base = 1.0 - 1.0 / np.sqrt(max(scaled, 1.0))
    return base ** np.asarray(d) / K


def fi_step_assumption_check(h: DiscreteChannel | np.ndarray, d_max: int) -> np.ndarray:
    """Per-step FI growth ratios used by the geometric approximation.

    Entry ``d-1`` (for ``d = 1 .. d_max``) is
    ``FI(res_d)/FI(res_{d-1}) * (M-d)/(M-d+1)``; the approximation step holds
    where the ratio is at least 1.  The sequence truncates at the first depth
    whose residual set is all zero.
    """
    powers = _sorted_powers(h)
    M = len(powers)
    if not 1 <= d_max < M:
        raise DimensionError(f"need 1 <= d_max < {M}")
    ratios = []
    prev_fi = _fi_of_powers(powers)
    for d in range(1, d_max + 1):
        residual = powers[d:]
        if float(np.sum(residual)) == 0.0:
            break
        fi_d = _fi_of_powers(residual)
        ratios.append(fi_d / prev_fi * (M - d) / (M - d + 1))
        prev_fi = fi_d
    return np.asarray(ratios)
