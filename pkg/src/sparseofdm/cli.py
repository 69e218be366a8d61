"""Command-line front end for the simulator.

Subcommands:

* ``sweep``    -- estimator error/iteration statistics over an SNR grid
* ``rho``      -- ensemble compressibility curves per channel generator
* ``generate`` -- dump one channel realization
* ``estimate`` -- single-shot estimation run with full diagnostics

Data goes to ``--out`` (or stdout) as CSV or JSON; the report commands also
render PNG figures next to the output file unless ``--no-plot`` is given.
Exit codes: 0 on success, 2 on configuration/usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .analysis import error_variance
from .channel import MMWAVE_KIND, sample_mpcs
from .estimators import omp_variance_bound
from .exceptions import ConfigurationError, SimulationError
from .ofdm import observe, to_frequency

PRESETS = {
    "paper": experiments.paper_scale_config,
    "small": experiments.small_scale_config,
}


def _parse_snr_grid(text: str) -> tuple[float, ...]:
    """Parse ``start:step:stop`` (inclusive stop) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ConfigurationError(f"bad SNR spec {text!r}, expected start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigurationError("SNR spec needs step > 0 and stop >= start")
    return tuple(np.arange(start, stop + step * 1e-9, step))


def _build_config(args) -> experiments.RunConfig:
    if args.config is not None:
        config = experiments.RunConfig.from_json(Path(args.config).read_text())
    else:
        config = PRESETS[args.preset]()
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if getattr(args, "snr", None) is not None and args.command == "sweep":
        updates["snr_grid_db"] = _parse_snr_grid(args.snr)
    if updates:
        config = dataclasses.replace(config, **updates)
    return config


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _plot_base(out: str) -> Path:
    path = Path(out)
    return path.parent / path.stem


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    records = experiments.run_snr_sweep(config, workers=args.workers)
    if args.format == "csv":
        _emit(experiments.sweep_to_csv(records), args.out)
    else:
        _emit(experiments.sweep_to_json(records), args.out)
    if args.out is not None and not args.no_plot:
        from . import plotting

        for path in plotting.plot_sweep(records, _plot_base(args.out)):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_rho(args) -> int:
    config = _build_config(args)
    generators = tuple(args.generators.split(","))
    comparison = experiments.run_rho_comparison(
        config,
        generators=generators,
        d_max=args.dmax,
        cost_snr_db=args.snr,
    )
    if args.format == "csv":
        _emit(experiments.rho_to_csv(comparison), args.out)
    else:
        _emit(experiments.rho_to_json(comparison), args.out)
    if args.out is not None and not args.no_plot:
        from . import plotting

        for path in plotting.plot_rho(comparison, _plot_base(args.out)):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_generate(args) -> int:
    config = _build_config(args)
    rng = experiments.trial_rng(config.master_seed, 0, 0)
    if config.channel.distribution_kind == MMWAVE_KIND:
        mpcs = sample_mpcs(config.channel, config.ofdm.M, rng)
        from .channel import assemble_channel

        dec = assemble_channel(mpcs, config.pulse)
        delays, amplitudes, phases = mpcs.delays, mpcs.amplitudes, mpcs.phases
    else:
        dec, delays = experiments.draw_channel(config, rng)
        support = np.flatnonzero(np.abs(dec.taps) > 0)
        amplitudes = np.abs(dec.taps[support])
        phases = np.mod(np.angle(dec.taps[support]), 2 * np.pi)
    if args.format == "csv":
        lines = ["tau_s,alpha,phi_rad"]
        for tau, alpha, phi in zip(delays, amplitudes, phases):
            lines.append(f"{tau:.12g},{alpha:.12g},{phi:.12g}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        data = {
            "distribution_kind": config.channel.distribution_kind,
            "tau_s": [float(t) for t in delays],
            "alpha": [float(a) for a in amplitudes],
            "phi_rad": [float(p) for p in phases],
            "taps": [[t.real, t.imag] for t in dec.taps],
        }
        _emit(json.dumps(data, indent=2) + "\n", args.out)
    return 0


def _cmd_estimate(args) -> int:
    config = _build_config(args)
    rng = experiments.trial_rng(config.master_seed, 0, 0)
    sigma2 = experiments.snr_db_to_sigma2(args.snr)
    dec, true_delays = experiments.draw_channel(config, rng)
    h_true = to_frequency(dec, config.ofdm.K)
    obs = observe(dec, config.ofdm, sigma2, rng)
    if args.dump_obs is not None:
        Path(args.dump_obs).write_text(obs.to_csv())
    results = {}
    for spec in config.estimators:
        try:
            result = experiments._run_estimator(spec, obs, true_delays, config.pulse)
        except SimulationError as exc:
            results[spec.id] = {"error": str(exc)}
            continue
        mse = error_variance(h_true, result.h_freq)
        if spec.kind == "ml_full":
            theory = (config.ofdm.M / config.ofdm.N) * sigma2
        elif spec.kind == "ml_genie":
            theory = (len(true_delays) / config.ofdm.N) * sigma2
        else:
            theory = (
                omp_variance_bound(result.iterations, config.ofdm.N, sigma2)
                if result.iterations > 0
                else 0.0
            )
        entry = result.to_json_dict()
        entry["mse"] = mse
        entry["theory_bound"] = theory
        results[spec.id] = entry
    if args.format == "json":
        payload = {
            "snr_db": args.snr,
            "noise_variance": sigma2,
            "true_delays_s": [float(t) for t in true_delays],
            "estimators": results,
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = ["estimator,iterations,mse,theory_bound,truncated"]
        for est_id, entry in results.items():
            if "error" in entry:
                lines.append(f"{est_id},nan,nan,nan,error")
                continue
            lines.append(
                f"{est_id},{entry['iterations']},{entry['mse']:.12g},"
                f"{entry['theory_bound']:.12g},{entry['truncated']}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser, default_format: str) -> None:
    parser.add_argument("--config", help="JSON run-config file")
    parser.add_argument(
        "--preset", choices=sorted(PRESETS), default="paper",
        help="built-in configuration (ignored when --config is given)",
    )
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--trials", type=int, help="trial count override")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default=default_format,
        help=f"output format (default {default_format})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparseofdm",
        description="Sparse multipath OFDM channel-estimation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="estimator statistics over an SNR grid")
    _add_common(p, "csv")
    p.add_argument("--snr", help="SNR grid as start:step:stop in dB")
    p.add_argument("--workers", type=int, default=1, help="trial worker processes")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("rho", help="ensemble compressibility comparison")
    _add_common(p, "csv")
    p.add_argument(
        "--generators",
        default="mmwave_lognormal,bernoulli_gaussian,bernoulli_lognormal,dense_gaussian",
        help="comma-separated channel generators",
    )
    p.add_argument("--dmax", type=int, default=None, help="maximum depth d")
    p.add_argument(
        "--snr", type=float, default=20.0,
        help="SNR (dB) used for the stop-rule cost line",
    )
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.set_defaults(func=_cmd_rho)

    p = sub.add_parser("generate", help="dump one channel realization")
    _add_common(p, "csv")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("estimate", help="single-shot run with full diagnostics")
    _add_common(p, "json")
    p.add_argument("--snr", type=float, default=20.0, help="SNR in dB")
    p.add_argument("--dump-obs", help="also write the pilot observation CSV here")
    p.set_defaults(func=_cmd_estimate)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"run 'sparseofdm {args.command} --help' for usage", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
