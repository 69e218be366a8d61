"""Partial DFT operators, comb pilots and noisy pilot-domain observations.

Scaling conventions, fixed once here and relied on everywhere else:

* ``dft_submatrix`` uses the unitary ``1/sqrt(K)`` normalization, so its M
  columns are orthonormal.
* ``pilot_submatrix`` keeps the decimated rows and, by default, rescales them
  by ``sqrt(K/N)`` so the N x M matrix has orthonormal columns as well.
* The physical pilot-domain response of the channel is the *unscaled*
  decimated matrix (``orthonormal=False``): each pilot sees the frequency
  response of its own subcarrier.  ``observe`` and the estimators use that
  matrix, which is what makes the classic ``(M/N) * sigma^2`` least-squares
  error floor come out with unit-amplitude pilots.
* ``noise_variance`` is the total variance per complex coefficient (each of
  the real and imaginary parts carries half).  With a unit-power channel and
  unit pilots, SNR is defined as ``1 / noise_variance``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import DiscreteChannel
from .exceptions import ConfigurationError, DimensionError


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM dimensions: K subcarriers, M-tap cyclic prefix, N comb pilots.

    ``pilot_values`` defaults to all-ones; anything without unit magnitude is
    accepted but triggers a validation warning, since the error-floor results
    assume unit-amplitude pilots.
    """

    K: int = 512
    M: int = 128
    N: int = 128
    pilot_values: tuple | None = None

    def __post_init__(self):
        for name in ("K", "M", "N"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if not self.K >= self.N >= self.M:
            raise ConfigurationError("need K >= N >= M")
        if self.K % self.N != 0:
            raise ConfigurationError("comb pilots require K to be a multiple of N")
        if self.pilot_values is not None:
            values = tuple(complex(v) for v in self.pilot_values)
            if len(values) != self.N:
                raise DimensionError("pilot_values must have length N")
            if np.max(np.abs(np.abs(np.asarray(values)) - 1.0)) > 1e-9:
                warnings.warn(
                    "pilot values are not unit-modulus; the least-squares "
                    "error floor no longer applies",
                    stacklevel=2,
                )
            object.__setattr__(self, "pilot_values", values)

    @property
    def pilots(self) -> np.ndarray:
        """Pilot symbol vector (all-ones unless configured otherwise)."""
        if self.pilot_values is None:
            return np.ones(self.N, dtype=np.complex128)
        return np.asarray(self.pilot_values, dtype=np.complex128)

    @property
    def comb_spacing(self) -> int:
        return self.K // self.N


@dataclass(frozen=True, eq=False)
class PilotObservation:
    """Noisy pilot-domain measurement plus the dimensions that produced it."""

    y: np.ndarray
    noise_variance: float
    config: OfdmConfig

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.complex128).ravel()
        if len(y) != self.config.N:
            raise DimensionError("observation length must equal the pilot count N")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    def to_csv(self) -> str:
        """Rows of ``re,im``, one per pilot subcarrier."""
        lines = ["re,im"]
        for value in self.y:
            lines.append(f"{value.real:.12g},{value.imag:.12g}")
        return "\n".join(lines) + "\n"


def dft_submatrix(K: int, M: int) -> np.ndarray:
    """First M columns of the unitary K-point DFT matrix.

    Entry (k, n) is ``exp(-2j*pi*k*n/K) / sqrt(K)``; the columns are
    orthonormal while the rows are not (K > M).
    """
    if K < M:
        raise DimensionError(f"need K >= M, got K={K}, M={M}")
    k = np.arange(K)[:, None]
    n = np.arange(M)[None, :]
    return np.exp(-2j * np.pi * k * n / K) / np.sqrt(K)


def pilot_submatrix(K: int, N: int, M: int, orthonormal: bool = True) -> np.ndarray:
    """Rows ``{0, K/N, 2K/N, ...}`` of ``dft_submatrix(K, M)``.

    With ``orthonormal=True`` (default) the rows are rescaled by
    ``sqrt(K/N)`` so the columns stay orthonormal.  ``orthonormal=False``
    returns the literal decimated submatrix, i.e. the response actually seen
    on the pilot subcarriers.
    """
    if K % N != 0:
        raise ConfigurationError("comb pilots require K to be a multiple of N")
    if N < M:
        raise DimensionError(f"need N >= M, got N={N}, M={M}")
    rows = np.arange(N) * (K // N)
    sub = dft_submatrix(K, M)[rows]
    if orthonormal:
        sub = sub * np.sqrt(K / N)
    return sub


def sensing_matrix(config: OfdmConfig) -> np.ndarray:
    """Pilot-domain observation operator ``D(x) @ F`` (N x M, physical scale)."""
    sub = pilot_submatrix(config.K, config.N, config.M, orthonormal=False)
    return config.pilots[:, None] * sub


def to_frequency(h: DiscreteChannel | np.ndarray, K: int) -> np.ndarray:
    """Frequency-domain channel over all K subcarriers (norm-preserving)."""
    taps = h.taps if isinstance(h, DiscreteChannel) else np.asarray(h, dtype=np.complex128)
    return dft_submatrix(K, len(taps)) @ taps


def observe(
    h: DiscreteChannel,
    config: OfdmConfig,
    sigma2: float,
    rng: np.random.Generator,
) -> PilotObservation:
    """Measure the channel on the pilot comb under complex AWGN.

    ``sigma2`` is the total noise variance per pilot coefficient; zero gives
    the exact pilot-domain channel.
    """
    if sigma2 < 0:
        raise ConfigurationError("sigma2 must be non-negative")
    if h.num_taps != config.M:
        raise DimensionError(
            f"channel has {h.num_taps} taps but the OFDM config expects {config.M}"
        )
    signal = sensing_matrix(config) @ h.taps
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(config.N) + 1j * rng.standard_normal(config.N)
    )
    return PilotObservation(y=signal + noise, noise_variance=float(sigma2), config=config)
