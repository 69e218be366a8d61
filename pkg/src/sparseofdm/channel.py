"""Random sparse multipath channels and their discrete-time equivalents.

Multipath arrival times come from an (optionally clustered) Poisson process
over the delay spread, amplitudes are lognormal with a mean power that decays
exponentially in delay, and phases are uniform.  A pulse-shaping model then
converts the continuous multipath set into the length-M tap vector seen by a
sampled receiver.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import ConfigurationError, DegenerateDictionaryError, DimensionError

# dB of amplitude per unit of natural-log amplitude: 20/ln(10)
_DB_PER_LOG_AMPLITUDE = 20.0 / math.log(10.0)

MMWAVE_KIND = "mmwave_lognormal"
COMPARISON_KINDS = ("bernoulli_gaussian", "bernoulli_lognormal", "dense_gaussian")
DISTRIBUTION_KINDS = (MMWAVE_KIND,) + COMPARISON_KINDS

PULSE_KINDS = ("sinc", "raised_cosine")

MAX_RESAMPLE_ATTEMPTS = 100


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelGenConfig:
    """Parameters of the random multipath generator.

    Attributes
    ----------
    l_mean : float
        Expected number of multipath components per draw.
    delay_spread : float
        Maximum arrival delay in seconds (arrivals beyond it are dropped).
    gamma_decay : float
        Mean power decay constant in seconds; log-amplitudes fall off as
        ``-delay / gamma_decay``.  May be ``math.inf`` for a flat profile.
    sigma_alpha : float
        Standard deviation of the lognormal shadowing term, in natural-log
        amplitude units (the default is the equivalent of 4 dB).
    p_recv : float
        Total received power the amplitude set is normalized to.
    carrier_freq : float
        Carrier frequency in Hz.  Metadata only: it justifies treating the
        per-component phases as independent and uniform.
    cluster_count_mean, intra_cluster_rate : float or None
        Optional two-level arrival structure: expected number of clusters and
        the subpath arrival rate (1/s) inside a cluster.  Both must be given
        together; when absent, arrivals form a single homogeneous process.
    distribution_kind : str
        One of ``mmwave_lognormal``, ``bernoulli_gaussian``,
        ``bernoulli_lognormal``, ``dense_gaussian``.  Only the first uses the
        lognormal machinery here; the others route to
        :func:`sample_comparison_channel`.
    """

    l_mean: float = 28.0
    delay_spread: float = 320e-9
    gamma_decay: float = 60e-9
    sigma_alpha: float = 4.0 / _DB_PER_LOG_AMPLITUDE
    p_recv: float = 1.0
    carrier_freq: float = 28e9
    cluster_count_mean: float | None = None
    intra_cluster_rate: float | None = None
    distribution_kind: str = MMWAVE_KIND

    def __post_init__(self):
        if not self.delay_spread > 0:
            raise ConfigurationError("delay_spread must be positive")
        if not self.gamma_decay > 0:
            raise ConfigurationError("gamma_decay must be positive")
        if self.sigma_alpha < 0:
            raise ConfigurationError("sigma_alpha must be non-negative")
        if not self.p_recv > 0:
            raise ConfigurationError("p_recv must be positive")
        if self.l_mean < 1:
            raise ConfigurationError("l_mean must be at least 1")
        if self.distribution_kind not in DISTRIBUTION_KINDS:
            raise ConfigurationError(
                f"unknown distribution_kind {self.distribution_kind!r}"
            )
        clustered = (self.cluster_count_mean is not None,
                     self.intra_cluster_rate is not None)
        if clustered[0] != clustered[1]:
            raise ConfigurationError(
                "cluster_count_mean and intra_cluster_rate must be set together"
            )
        if self.cluster_count_mean is not None:
            if not self.cluster_count_mean > 0 or not self.intra_cluster_rate > 0:
                raise ConfigurationError("cluster parameters must be positive")

    @property
    def clustered(self) -> bool:
        return self.cluster_count_mean is not None

    def to_json(self) -> str:
        """Serialize as a flat key/value JSON document."""
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChannelGenConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigurationError("channel config JSON must be an object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown channel config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class PulseConfig:
    """Transmit pulse and sampling grid used to discretize the channel.

    ``truncation_tol`` documents how far the windowed pulse energy may fall
    from unity: for the default sinc pulse the energy of ``pulse_vector(tau)``
    is exact on the sampling grid and within about ``truncation_tol`` for
    delays more than ~15 samples away from both window edges.  Delays near an
    edge lose up to ~10% of their energy to truncation.
    """

    kind: str = "sinc"
    sample_period: float = 2.5e-9
    num_taps: int = 128
    rolloff: float = 0.25
    truncation_tol: float = 1e-2

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ConfigurationError(f"unknown pulse kind {self.kind!r}")
        if not self.sample_period > 0:
            raise ConfigurationError("sample_period must be positive")
        if int(self.num_taps) != self.num_taps or self.num_taps < 1:
            raise ConfigurationError("num_taps must be a positive integer")
        if self.kind == "raised_cosine" and not 0 < self.rolloff <= 1:
            raise ConfigurationError("rolloff must lie in (0, 1]")
        if not self.truncation_tol > 0:
            raise ConfigurationError("truncation_tol must be positive")


@dataclass(frozen=True, eq=False)
class MpcSet:
    """One multipath realization: delays, non-negative amplitudes, phases.

    Delays are sorted, strictly increasing and aligned so the first arrival
    sits at zero.  Phases live in [0, 2*pi).
    """

    delays: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=np.float64).ravel()
        amplitudes = np.asarray(self.amplitudes, dtype=np.float64).ravel()
        phases = np.asarray(self.phases, dtype=np.float64).ravel()
        if not (len(delays) == len(amplitudes) == len(phases)) or len(delays) < 1:
            raise DimensionError("delays, amplitudes and phases must share a length >= 1")
        if delays[0] != 0.0:
            raise ConfigurationError("first delay must be exactly zero")
        if np.any(np.diff(delays) <= 0):
            raise ConfigurationError("delays must be strictly increasing")
        if np.any(amplitudes < 0):
            raise ConfigurationError("amplitudes must be non-negative")
        if np.any((phases < 0) | (phases >= 2 * np.pi)):
            raise ConfigurationError("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "delays", _readonly(delays))
        object.__setattr__(self, "amplitudes", _readonly(amplitudes))
        object.__setattr__(self, "phases", _readonly(phases))

    def __len__(self) -> int:
        return len(self.delays)

    @property
    def gains(self) -> np.ndarray:
        """Complex per-component gains ``amplitude * exp(j*phase)``."""
        return self.amplitudes * np.exp(1j * self.phases)

    @property
    def total_power(self) -> float:
        return float(np.sum(self.amplitudes**2))

    def to_csv(self) -> str:
        """Rows of ``tau_s,alpha,phi_rad``."""
        lines = ["tau_s,alpha,phi_rad"]
        for tau, alpha, phi in zip(self.delays, self.amplitudes, self.phases):
            lines.append(f"{tau:.12g},{alpha:.12g},{phi:.12g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class DiscreteChannel:
    """Length-M sampled FIR channel, optionally tagged with its origin.

    ``pulse`` is ``None`` for tap-domain channels that never went through a
    pulse model (the comparison generators).  Note the tap energy equals the
    multipath power exactly only when all delays sit on the sampling grid of a
    Nyquist pulse; off-grid arrivals close to each other beat against one
    another and move the realized norm around its unit mean.
    """

    taps: np.ndarray
    pulse: PulseConfig | None = None
    source: MpcSet | None = None

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128).ravel()
        if len(taps) < 1:
            raise DimensionError("taps must be a non-empty vector")
        if self.pulse is not None and len(taps) != self.pulse.num_taps:
            raise DimensionError("taps length must match pulse.num_taps")
        object.__setattr__(self, "taps", _readonly(taps))

    @property
    def num_taps(self) -> int:
        return len(self.taps)

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


def _pulse_values(pulse: PulseConfig, t: np.ndarray) -> np.ndarray:
    """Evaluate the pulse at times ``t`` (seconds)."""
    x = np.asarray(t, dtype=np.float64) / pulse.sample_period
    if pulse.kind == "sinc":
        return np.sinc(x)
    beta = pulse.rolloff
    den = 1.0 - (2.0 * beta * x) ** 2
    # The closed form cancels catastrophically near |x| = 1/(2*beta).
    singular = np.abs(den) < 1e-6
    safe_den = np.where(singular, 1.0, den)
    vals = np.sinc(x) * np.cos(np.pi * beta * x) / safe_den
    limit = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta))
    return np.where(singular, limit, vals)


def pulse_vector(pulse: PulseConfig, tau: float) -> np.ndarray:
    """Sampled pulse response ``p(n*T - tau)`` for n in [0, num_taps).

    ``tau`` is normally inside ``[0, num_taps*T]``; values outside are
    evaluated as-is but untested territory.
    """
    grid = np.arange(pulse.num_taps) * pulse.sample_period
    return _pulse_values(pulse, grid - float(tau))


def pulse_matrix(pulse: PulseConfig, delays: np.ndarray) -> np.ndarray:
    """Stack ``pulse_vector`` columns for each delay (shape M x L).

    Raises ``DegenerateDictionaryError`` for duplicate delays, which would
    produce identical columns.
    """
    delays = np.asarray(delays, dtype=np.float64).ravel()
    if len(np.unique(delays)) != len(delays):
        raise DegenerateDictionaryError("delays must be distinct")
    grid = np.arange(pulse.num_taps) * pulse.sample_period
    return _pulse_values(pulse, grid[:, None] - delays[None, :])


def _draw_arrivals(config: ChannelGenConfig, rng: np.random.Generator):
    """One draw of arrival delays plus their shadowing terms (unsorted count)."""
    ds = config.delay_spread
    if not config.clustered:
        count = rng.poisson(config.l_mean)
        delays = np.sort(rng.uniform(0.0, ds, size=count))
        shadow = rng.normal(0.0, config.sigma_alpha, size=count)
        return delays, shadow

    n_clusters = rng.poisson(config.cluster_count_mean)
    if n_clusters == 0:
        return np.empty(0), np.empty(0)
    centers = np.sort(rng.uniform(0.0, ds, size=n_clusters))
    # Split the target component count evenly across clusters; shadowing
    # variance splits evenly between the cluster and subpath terms.
    subpath_mean = max(config.l_mean / config.cluster_count_mean - 1.0, 0.0)
    sigma_level = config.sigma_alpha / math.sqrt(2.0)
    delays, shadow = [], []
    for center in centers:
        n_sub = 1 + rng.poisson(subpath_mean)
        gaps = rng.exponential(1.0 / config.intra_cluster_rate, size=n_sub - 1)
        offsets = np.concatenate([[0.0], np.cumsum(gaps)])
        taus = center + offsets
        keep = taus <= ds
        if not np.any(keep):
            continue
        cluster_shadow = rng.normal(0.0, sigma_level)
        delays.append(taus[keep])
        shadow.append(cluster_shadow + rng.normal(0.0, sigma_level, size=keep.sum()))
    if not delays:
        return np.empty(0), np.empty(0)
    delays = np.concatenate(delays)
    shadow = np.concatenate(shadow)
    order = np.argsort(delays)
    return delays[order], shadow[order]


def sample_mpcs(config: ChannelGenConfig, M: int, rng: np.random.Generator) -> MpcSet:
    """Draw one random multipath set with between 1 and ``M`` components.

    Arrival delays follow the configured Poisson process truncated to the
    delay spread and are shifted so the first arrival is at zero.  Amplitudes
    are ``exp(-tau/gamma + shadowing)`` rescaled so their squared sum equals
    ``p_recv``; phases are i.i.d. uniform.  Draws with zero components or more
    than ``M`` are rejected and redrawn (bounded, then an error).
    """
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    if config.l_mean > M:
        raise ConfigurationError("l_mean may not exceed the tap count M")
    for _ in range(MAX_RESAMPLE_ATTEMPTS):
        delays, shadow = _draw_arrivals(config, rng)
        if 1 <= len(delays) <= M and np.all(np.diff(delays) > 0):
            break
    else:
        raise ConfigurationError(
            f"arrival process failed to produce 1..{M} components "
            f"in {MAX_RESAMPLE_ATTEMPTS} attempts"
        )
    delays = delays - delays[0]
    log_amp = -delays / config.gamma_decay + shadow
    raw = np.exp(log_amp)
    amplitudes = raw * math.sqrt(config.p_recv / float(np.sum(raw**2)))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(delays))
    return MpcSet(delays=delays, amplitudes=amplitudes, phases=phases)


def sample_comparison_channel(
    kind: str,
    M: int,
    L: int,
    rng: np.random.Generator,
    lognormal_sigma: float = 1.0,
) -> DiscreteChannel:
    """Draw a unit-power tap-domain channel from one of the reference models.

    ``bernoulli_gaussian`` and ``bernoulli_lognormal`` place exactly ``L``
    nonzero taps on uniformly chosen indices; ``dense_gaussian`` fills all
    ``M`` taps.  ``lognormal_sigma`` is the log-amplitude spread of the
    lognormal variant (a stand-in for the heavy-tailed amplitude statistics;
    not calibrated against any measurement model).
    """
    if kind not in COMPARISON_KINDS:
        raise ConfigurationError(f"unknown comparison kind {kind!r}")
    if not 1 <= L <= M:
        raise DimensionError(f"need 1 <= L <= M, got L={L}, M={M}")
    taps = np.zeros(M, dtype=np.complex128)
    if kind == "dense_gaussian":
        taps = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / math.sqrt(2.0)
    else:
        support = rng.choice(M, size=L, replace=False)
        if kind == "bernoulli_gaussian":
            values = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / math.sqrt(2.0)
        else:
            magnitude = np.exp(rng.normal(0.0, lognormal_sigma, size=L))
            values = magnitude * np.exp(2j * np.pi * rng.uniform(size=L))
        taps[support] = values
    taps /= np.sqrt(np.sum(np.abs(taps) ** 2))
    return DiscreteChannel(taps=taps, pulse=None, source=None)


def assemble_channel(mpcs: MpcSet, pulse: PulseConfig) -> DiscreteChannel:
    """Superimpose the pulse responses of all components into the tap vector.

    Components delayed beyond the sampling window leak part of their energy
    outside the FIR length; no error is raised for them.
    """
    taps = np.zeros(pulse.num_taps, dtype=np.complex128)
    for tau, gain in zip(mpcs.delays, mpcs.gains):
        taps += pulse_vector(pulse, tau) * gain
    return DiscreteChannel(taps=taps, pulse=pulse, source=mpcs)
