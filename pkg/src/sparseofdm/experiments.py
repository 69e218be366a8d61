"""Monte Carlo harness: SNR sweeps of the estimators and ensemble
compressibility comparisons, with deterministic per-trial seeding and
CSV/JSON table output.

Every trial owns a counter-based random stream keyed by
``(master_seed, trial_index, cell_index)``, so runs are reproducible
bit-for-bit and trials can execute on a worker pool without changing the
aggregated output.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import error_variance, geometric_bound, rho_bar_profile
from .channel import (
    COMPARISON_KINDS,
    MMWAVE_KIND,
    ChannelGenConfig,
    DiscreteChannel,
    PulseConfig,
    assemble_channel,
    sample_comparison_channel,
    sample_mpcs,
)
from .estimators import (
    DictionaryConfig,
    ml_full,
    ml_genie,
    omp,
    omp_variance_bound,
)
from .exceptions import ConfigurationError, SimulationError
from .ofdm import OfdmConfig, observe, to_frequency

ESTIMATOR_KINDS = ("ml_full", "ml_genie", "omp")

SWEEP_COLUMNS = (
    "snr_db,estimator,mean_mse,mse_stderr,mean_L_hat,std_L_hat,theory_bound,failed_trials"
)
RHO_COLUMNS = "generator,d,rho_bar_mean,lb_fi,ub_fi,lb_geometric,cost_line"


def snr_db_to_sigma2(snr_db: float) -> float:
    """Noise variance per coefficient for a unit-power channel: 10^(-SNR/10)."""
    return 10.0 ** (-snr_db / 10.0)


def trial_rng(master_seed: int, trial_index: int, cell_index: int) -> np.random.Generator:
    """Independent counter-based stream for one (trial, cell) pair."""
    seq = np.random.SeedSequence((master_seed, trial_index, cell_index))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator to run per trial; ``dictionary`` applies to kind 'omp'."""

    id: str
    kind: str
    dictionary: DictionaryConfig | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigurationError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "omp" and self.dictionary is None:
            raise ConfigurationError("omp estimator spec needs a dictionary config")
        if not self.id:
            raise ConfigurationError("estimator id must be non-empty")

    def to_json_dict(self) -> dict:
        data = {"id": self.id, "kind": self.kind}
        if self.dictionary is not None:
            data.update(asdict(self.dictionary))
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "EstimatorSpec":
        data = dict(data)
        est_id = data.pop("id", None)
        kind = data.pop("kind", None)
        dictionary = None
        if kind == "omp":
            dict_fields = set(DictionaryConfig.__dataclass_fields__)
            unknown = set(data) - dict_fields
            if unknown:
                raise ConfigurationError(f"unknown estimator keys: {sorted(unknown)}")
            dictionary = DictionaryConfig(**data)
        elif data:
            raise ConfigurationError(f"unexpected estimator keys: {sorted(data)}")
        return cls(id=est_id, kind=kind, dictionary=dictionary)


def default_estimators(M: int) -> tuple[EstimatorSpec, ...]:
    """The benchmark set: full LS, delay oracle, and three greedy variants."""
    return (
        EstimatorSpec("ml_full", "ml_full"),
        EstimatorSpec("ml_genie", "ml_genie"),
        EstimatorSpec("omp_m", "omp", DictionaryConfig(num_atoms=M)),
        EstimatorSpec("omp_4m", "omp", DictionaryConfig(num_atoms=4 * M)),
        EstimatorSpec("ompbr", "omp", DictionaryConfig(num_atoms=M, refine=True)),
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything one reproducible experiment needs."""

    ofdm: OfdmConfig
    channel: ChannelGenConfig
    pulse: PulseConfig
    estimators: tuple[EstimatorSpec, ...]
    snr_grid_db: tuple[float, ...]
    trials: int = 100
    master_seed: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigurationError("trials must be a positive integer")
        if len(self.snr_grid_db) == 0:
            raise ConfigurationError("snr_grid_db must be non-empty")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ConfigurationError("master_seed must be a non-negative integer")
        if not self.estimators:
            raise ConfigurationError("need at least one estimator")
        if self.pulse.num_taps != self.ofdm.M:
            raise ConfigurationError("pulse.num_taps must equal the OFDM tap count M")
        window = self.ofdm.M * self.pulse.sample_period
        if self.channel.delay_spread > window * (1 + 1e-12):
            raise ConfigurationError(
                "channel delay_spread exceeds the M-tap sampling window"
            )
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))

    def to_json(self) -> str:
        data = {
            "ofdm": {
                "K": self.ofdm.K,
                "M": self.ofdm.M,
                "N": self.ofdm.N,
                "pilot_values": None
                if self.ofdm.pilot_values is None
                else [[v.real, v.imag] for v in self.ofdm.pilot_values],
            },
            "channel": json.loads(self.channel.to_json()),
            "pulse": asdict(self.pulse),
            "estimators": [spec.to_json_dict() for spec in self.estimators],
            "snr_grid_db": list(self.snr_grid_db),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "output_path": self.output_path,
        }
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("run config JSON must be an object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown run config keys: {sorted(unknown)}")
        ofdm_data = dict(data.get("ofdm", {}))
        pilots = ofdm_data.pop("pilot_values", None)
        if pilots is not None:
            pilots = tuple(complex(re, im) for re, im in pilots)
        ofdm = OfdmConfig(pilot_values=pilots, **ofdm_data)
        channel = ChannelGenConfig(**data.get("channel", {}))
        pulse = PulseConfig(**data.get("pulse", {}))
        estimators = tuple(
            EstimatorSpec.from_json_dict(item) for item in data.get("estimators", [])
        )
        if not estimators:
            estimators = default_estimators(ofdm.M)
        return cls(
            ofdm=ofdm,
            channel=channel,
            pulse=pulse,
            estimators=estimators,
            snr_grid_db=tuple(data.get("snr_grid_db", default_snr_grid())),
            trials=data.get("trials", 100),
            master_seed=data.get("master_seed", 1),
            output_path=data.get("output_path"),
        )


def default_snr_grid() -> tuple[float, ...]:
    return tuple(np.arange(-10.0, 30.0 + 1e-9, 2.5))


def paper_scale_config(
    trials: int = 1000,
    master_seed: int = 1,
    snr_grid_db: tuple[float, ...] | None = None,
) -> RunConfig:
    """Full-scale defaults: K=512, M=N=128, T=2.5 ns, 320 ns delay spread."""
    ofdm = OfdmConfig(K=512, M=128, N=128)
    return RunConfig(
        ofdm=ofdm,
        channel=ChannelGenConfig(),
        pulse=PulseConfig(num_taps=128),
        estimators=default_estimators(ofdm.M),
        snr_grid_db=snr_grid_db or default_snr_grid(),
        trials=trials,
        master_seed=master_seed,
    )


def small_scale_config(
    trials: int = 100,
    master_seed: int = 1,
    snr_grid_db: tuple[float, ...] | None = None,
) -> RunConfig:
    """Desk-scale preset for quick runs and CI: K=64, M=N=16."""
    ofdm = OfdmConfig(K=64, M=16, N=16)
    pulse = PulseConfig(num_taps=16)
    channel = ChannelGenConfig(
        l_mean=6.0, delay_spread=40e-9, gamma_decay=7.5e-9
    )
    return RunConfig(
        ofdm=ofdm,
        channel=channel,
        pulse=pulse,
        estimators=default_estimators(ofdm.M),
        snr_grid_db=snr_grid_db or default_snr_grid(),
        trials=trials,
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class SweepRecord:
    """One (SNR, estimator) cell of the sweep table."""

    snr_db: float
    estimator_id: str
    mean_mse: float
    mse_stderr: float
    mean_l_hat: float
    std_l_hat: float
    theory_bound: float
    failed_trials: int


def draw_channel(
    config: RunConfig, rng: np.random.Generator
) -> tuple[DiscreteChannel, np.ndarray]:
    """One channel realization plus its true delay set (for the oracle)."""
    kind = config.channel.distribution_kind
    M = config.ofdm.M
    if kind == MMWAVE_KIND:
        mpcs = sample_mpcs(config.channel, M, rng)
        return assemble_channel(mpcs, config.pulse), mpcs.delays
    L = min(max(int(round(config.channel.l_mean)), 1), M)
    dec = sample_comparison_channel(kind, M, L, rng)
    support = np.flatnonzero(np.abs(dec.taps) > 0)
    delays = support * config.pulse.sample_period
    return dec, delays


def _run_estimator(spec, obs, true_delays, pulse):
    if spec.kind == "ml_full":
        return ml_full(obs)
    if spec.kind == "ml_genie":
        return ml_genie(obs, true_delays, pulse)
    return omp(obs, spec.dictionary, pulse)


def _run_trial(config: RunConfig, snr_index: int, trial_index: int) -> dict:
    """One channel + observation, all estimators.  Failures record None."""
    rng = trial_rng(config.master_seed, trial_index, snr_index)
    sigma2 = snr_db_to_sigma2(config.snr_grid_db[snr_index])
    dec, true_delays = draw_channel(config, rng)
    h_true = to_frequency(dec, config.ofdm.K)
    obs = observe(dec, config.ofdm, sigma2, rng)
    out = {}
    for spec in config.estimators:
        try:
            result = _run_estimator(spec, obs, true_delays, config.pulse)
        except SimulationError:
            out[spec.id] = None
            continue
        out[spec.id] = (
            error_variance(h_true, result.h_freq),
            float(result.iterations),
        )
    return out


def _run_trial_block(args) -> list[dict]:
    config, snr_index, lo, hi = args
    return [_run_trial(config, snr_index, t) for t in range(lo, hi)]


def _aggregate_cell(config: RunConfig, snr_index: int, trials: list[dict]) -> list[SweepRecord]:
    snr_db = config.snr_grid_db[snr_index]
    sigma2 = snr_db_to_sigma2(snr_db)
    records = []
    for spec in config.estimators:
        outcomes = [t[spec.id] for t in trials]
        ok = [o for o in outcomes if o is not None]
        failed = len(outcomes) - len(ok)
        if ok:
            mses = np.array([o[0] for o in ok])
            l_hats = np.array([o[1] for o in ok])
            mean_mse = float(np.mean(mses))
            stderr = float(np.std(mses, ddof=1) / math.sqrt(len(mses))) if len(mses) > 1 else 0.0
            mean_l = float(np.mean(l_hats))
            std_l = float(np.std(l_hats, ddof=1)) if len(l_hats) > 1 else 0.0
        else:
            mean_mse = stderr = mean_l = std_l = float("nan")
        if spec.kind == "ml_full":
            theory = (config.ofdm.M / config.ofdm.N) * sigma2
        elif spec.kind == "ml_genie":
            theory = (mean_l / config.ofdm.N) * sigma2
        else:
            theory = (
                omp_variance_bound(mean_l, config.ofdm.N, sigma2) if mean_l > 0 else 0.0
            )
        records.append(
            SweepRecord(
                snr_db=float(snr_db),
                estimator_id=spec.id,
                mean_mse=mean_mse,
                mse_stderr=stderr,
                mean_l_hat=mean_l,
                std_l_hat=std_l,
                theory_bound=float(theory),
                failed_trials=failed,
            )
        )
    return records


def run_snr_sweep(config: RunConfig, workers: int = 1) -> list[SweepRecord]:
    """Sweep all estimators over the SNR grid.

    Theory columns come from the error-variance formulas only (the greedy
    bound uses the cell's empirical mean iteration count as its plug-in).
    A fixed ``master_seed`` yields identical tables regardless of ``workers``.
    """
    records: list[SweepRecord] = []
    for snr_index in range(len(config.snr_grid_db)):
        if workers <= 1:
            trials = [_run_trial(config, snr_index, t) for t in range(config.trials)]
        else:
            bounds = np.linspace(0, config.trials, workers + 1, dtype=int)
            blocks = [
                (config, snr_index, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            trials = []
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for block in pool.map(_run_trial_block, blocks):
                    trials.extend(block)
        records.extend(_aggregate_cell(config, snr_index, trials))
    return records


@dataclass(frozen=True, eq=False)
class RhoRecord:
    """One (generator, depth) row of the compressibility table."""

    generator: str
    d: int
    rho_bar_mean: float
    lb_fi: float
    ub_fi: float
    lb_geometric: float
    cost_line: float


@dataclass(frozen=True, eq=False)
class RhoComparison:
    """Ensemble-averaged compressibility curves per generator.

    ``records`` average the per-realization bound curves; because averaging
    the bound and bounding the average are both defensible readings, the
    ``geometric_from_mean_fi`` curves (geometric bound evaluated at the
    ensemble-mean Fairness Index) are carried alongside for JSON output.
    """

    records: list
    mean_fi: dict
    geometric_from_mean_fi: dict


def _nanmean(values: np.ndarray) -> float:
    finite = values[~np.isnan(values)]
    return float(np.mean(finite)) if len(finite) else float("nan")


def run_rho_comparison(
    config: RunConfig,
    generators: tuple[str, ...] = (MMWAVE_KIND,) + COMPARISON_KINDS,
    d_max: int | None = None,
    cost_snr_db: float = 20.0,
) -> RhoComparison:
    """Ensemble residual-power curves and bounds for several generators.

    ``cost_line`` is the linear reference ``d * sigma2 / N`` whose crossing
    with each decaying curve indicates where the greedy stop rule would land.
    """
    if not generators:
        raise ConfigurationError("need at least one generator")
    M = config.ofdm.M
    K = config.ofdm.K
    d_max = M if d_max is None else int(d_max)
    if not 0 < d_max <= M:
        raise ConfigurationError(f"need 0 < d_max <= {M}")
    sigma2 = snr_db_to_sigma2(cost_snr_db)

    records: list[RhoRecord] = []
    mean_fi: dict = {}
    geo_from_mean: dict = {}
    for gen_index, kind in enumerate(generators):
        if kind not in (MMWAVE_KIND,) + COMPARISON_KINDS:
            raise ConfigurationError(f"unknown generator {kind!r}")
        gen_config = (
            config.channel
            if kind == MMWAVE_KIND
            else ChannelGenConfig(
                l_mean=config.channel.l_mean,
                delay_spread=config.channel.delay_spread,
                distribution_kind=kind,
            )
        )
        run_cfg = RunConfig(
            ofdm=config.ofdm,
            channel=gen_config,
            pulse=config.pulse,
            estimators=config.estimators,
            snr_grid_db=config.snr_grid_db,
            trials=config.trials,
            master_seed=config.master_seed,
        )
        rho_sum = np.zeros(d_max + 1)
        lb_rows = np.empty((config.trials, d_max + 1))
        ub_rows = np.empty((config.trials, d_max + 1))
        geo_sum = np.zeros(d_max + 1)
        fis = np.empty(config.trials)
        for trial in range(config.trials):
            rng = trial_rng(config.master_seed, trial, gen_index)
            dec, _ = draw_channel(run_cfg, rng)
            profile = rho_bar_profile(dec, K)
            rho_sum += profile.rho_bar[: d_max + 1]
            lb_rows[trial] = profile.bound_lower_fi[: d_max + 1]
            ub_rows[trial] = profile.bound_upper_fi[: d_max + 1]
            geo_sum += profile.bound_geometric[: d_max + 1]
            fis[trial] = profile.fi_full
        mean_fi[kind] = float(np.mean(fis))
        geo_from_mean[kind] = geometric_bound(
            mean_fi[kind], M, np.arange(d_max + 1), K
        ).tolist()
        for d in range(d_max + 1):
            records.append(
                RhoRecord(
                    generator=kind,
                    d=d,
                    rho_bar_mean=float(rho_sum[d] / config.trials),
                    lb_fi=_nanmean(lb_rows[:, d]),
                    ub_fi=_nanmean(ub_rows[:, d]),
                    lb_geometric=float(geo_sum[d] / config.trials),
                    cost_line=d * sigma2 / config.ofdm.N,
                )
            )
    return RhoComparison(
        records=records, mean_fi=mean_fi, geometric_from_mean_fi=geo_from_mean
    )


def sweep_to_csv(records: list[SweepRecord]) -> str:
    lines = [SWEEP_COLUMNS]
    for r in records:
        lines.append(
            f"{r.snr_db:.12g},{r.estimator_id},{r.mean_mse:.12g},{r.mse_stderr:.12g},"
            f"{r.mean_l_hat:.12g},{r.std_l_hat:.12g},{r.theory_bound:.12g},"
            f"{r.failed_trials}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(records: list[SweepRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)


def rho_to_csv(comparison: RhoComparison) -> str:
    lines = [RHO_COLUMNS]
    for r in comparison.records:
        lines.append(
            f"{r.generator},{r.d},{r.rho_bar_mean:.12g},{r.lb_fi:.12g},"
            f"{r.ub_fi:.12g},{r.lb_geometric:.12g},{r.cost_line:.12g}"
        )
    return "\n".join(lines) + "\n"


def rho_to_json(comparison: RhoComparison) -> str:
    return json.dumps(
        {
            "records": [asdict(r) for r in comparison.records],
            "mean_fi": comparison.mean_fi,
            "geometric_from_mean_fi": comparison.geometric_from_mean_fi,
        },
        indent=2,
    )
