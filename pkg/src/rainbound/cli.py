"""Command-line entry point: ``rainbound <command> --config FILE --out DIR``.

Every command writes CSV/JSON tables plus a ``manifest.json`` holding the
config hash, package versions and output checksums. Nothing time-dependent
is recorded, so identical inputs give byte-identical output directories.

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numeric or
convergence failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import platform
import sys
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__
from .config import RunConfig
from .errors import ConfigError, NumericError, UndetectableError
from .fileio import ingest_series, write_csv, write_json
from .fisher_bounds import (bcrb, data_information, pareto_frontier, rmin_closed_form, rmin_solve,
                            side_information_table, temporal_gain)
from .itu_atmos import AtmosphericState, FrequencyGrid
from .montecarlo import (NoiseMode, arl0_experiment, cusum_delay_experiment, estimator_efficiency_experiment,
                         fusion_experiment, gen_observation, gen_rain_series, loglog_slope,
                         multilink_scaling_experiment)
from .pilot_alloc import allocation_sweep, regime_thresholds
from .rain_detect import add_wald, detection_probability, run_series
from .rain_estimate import map_newton, mle_newton
from .slant_geometry import (NoiseMode as ElevationNoise, elevation_sweep, leff_of_elevation, optimal_locus,
                             sensing_optimal_elevation_closed, sensing_optimal_elevation_numeric,
                             snr_of_elevation)

EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 1, 2, 3
TABLE_RATE = 20.0


def _bound_fn(cfg: RunConfig, window: int | None):
    link = cfg.link_config()
    prior = cfg.rain_prior()
    sigma = link.reference_noise().sigma_n

    def fn(r):
        j_d = data_information(r, link.grid, link.geometry, sigma)
        if window is None:
            return 1.0 / j_d
        return bcrb(j_d, prior, temporal_gain(prior.temporal_rho, window)).variance

    return fn


def cmd_bounds(cfg: RunConfig, out: Path) -> list[Path]:
    link = cfg.link_config()
    windows = cfg.prior.windows
    fns = [("crb", None, _bound_fn(cfg, None))] + [(f"bcrb_T{w}", w, _bound_fn(cfg, w)) for w in windows]
    files = []
    rows = [[r] + [math.sqrt(fn(r)) for _, _, fn in fns] for r in cfg.experiment.rain_rates]
    files.append(write_csv(out / "crb_vs_R.csv", ["rain_rate_mm_h"] + [f"{n}_rmse_mm_h" for n, _, _ in fns], rows))

    table = [[name, "" if w is None else w, rmin_solve(fn), math.sqrt(fn(TABLE_RATE))] for name, w, fn in fns]
    closed = rmin_closed_form(link.reference_noise().sigma_n, link.grid.size, cfg.link.k_bar,
                              cfg.link.alpha_bar, link.l_eff)
    table.append(["crb_closed_form", "", closed, ""])
    files.append(write_csv(out / "rmin_table.csv", ["bound", "window_min", "rmin_mm_h", "rmse_at_20_mm_h"], table))

    side = side_information_table(AtmosphericState(TABLE_RATE), link.grid.with_band_average(False),
                                  link.geometry, link.reference_noise().sigma_n)
    files.append(write_csv(out / "sideinfo_table.csv",
                           ["unknowns", "crb_rmse_mm_h", "relative_crb_percent", "condition_number"],
                           [["+".join(s.unknowns), math.sqrt(s.crb), s.relative_crb, s.condition_number]
                            for s in side]))

    etas = cfg.experiment.pareto_etas
    crb = pareto_frontier(TABLE_RATE, None, link, etas)
    long_window = max(windows)
    vt = pareto_frontier(TABLE_RATE, cfg.rain_prior(), link, etas, long_window)
    files.append(write_csv(out / "pareto.csv",
                           ["eta", "spectral_efficiency_bit_s_hz", "crb_rmse_mm_h", f"bcrb_T{long_window}_rmse_mm_h"],
                           [[a.eta, a.spectral_efficiency, a.rmse, b.rmse] for a, b in zip(crb, vt)]))
    return files


def cmd_geometry(cfg: RunConfig, out: Path) -> list[Path]:
    link = cfg.link_config()
    els = cfg.experiment.elevations
    real = elevation_sweep(els, link, ElevationNoise.REALISTIC)
    const = elevation_sweep(els, link, ElevationNoise.CONSTANT)
    rows = [[e, leff_of_elevation(e, link.geometry), snr_of_elevation(e, link.snr0, link.geometry.base_elevation),
             a, b, z] for e, a, b, z in zip(els, real.rmin_values, const.rmin_values, real.p618_zone)]
    files = [write_csv(out / "rmin_vs_elevation.csv",
                       ["elevation_deg", "leff_km", "clear_sky_snr_linear", "rmin_realistic_mm_h",
                        "rmin_constant_mm_h", "p618_zone"], rows)]
    locus = optimal_locus(cfg.experiment.locus_rates, link)
    # the same locus with gas and cloud loss also taken out of the SNR
    wet = optimal_locus(cfg.experiment.locus_rates, link, include_baseline=True)
    files.append(write_csv(out / "optimal_locus.csv",
                           ["rain_rate_mm_h", "theta_sens_deg", "theta_comm_deg", "gap_deg",
                            "theta_sens_with_baseline_deg", "theta_comm_with_baseline_deg"],
                           [[p.rain_rate, p.theta_sens, p.theta_comm, p.gap, q.theta_sens, q.theta_comm]
                            for p, q in zip(locus, wet)]))
    closed = sensing_optimal_elevation_closed(link)
    files.append(write_json(out / "theta_star.json", {
        "closed_form_deg": closed.elevation,
        "numeric_deg": sensing_optimal_elevation_numeric(link),
        "x_star": closed.x_star,
        "beta_star": closed.beta_star,
        "saturated": closed.saturated,
    }))
    return files


def cmd_alloc(cfg: RunConfig, out: Path) -> list[Path]:
    link = cfg.link_config()
    policies = cfg.policies()
    prior = cfg.rain_prior()
    window = max(cfg.prior.windows)
    rows = allocation_sweep(cfg.experiment.rain_rates, policies, link, prior, window, cfg.policy.baselines)
    files = [write_csv(out / "allocation_sweep.csv",
                       ["rain_rate_mm_h", "c_min_bit_s_hz", "scheme", "eta", "regime",
                        "spectral_efficiency_bit_s_hz", f"bcrb_T{window}_rmse_mm_h", "violates_c_min"],
                       [list(r.__dict__.values()) for r in rows])]
    thresholds = [[p.c_min, *regime_thresholds(p, link)] for p in policies]
    files.append(write_csv(out / "regime_thresholds.csv", ["c_min_bit_s_hz", "r_sat_mm_h", "r_out_mm_h"],
                           thresholds))
    return files


def cmd_detect(cfg: RunConfig, out: Path) -> list[Path]:
    cc = cfg.cusum_config()
    windows = cfg.detect.windows
    mc = cusum_delay_experiment(cfg.experiment.detect_rates, cc, cfg.experiment.trials_cusum, cfg.rng_spec(),
                                windows)
    rows = []
    for r, m in zip(cfg.experiment.detect_rates, mc):
        try:
            wald = add_wald(r, cc)
        except UndetectableError:
            wald = math.inf
        rows.append([r, wald, *[detection_probability(r, w, cc) for w in windows[:3]], m.mc_add, m.ratio,
                     m.pd_5, m.pd_10, m.pd_30, m.missed])
    header = (["rain_rate_mm_h", "wald_add_min"] + [f"pd_{w:g}min_analytic" for w in windows[:3]]
              + ["mc_add_min", "mc_over_wald"] + [f"pd_{w:g}min_mc" for w in windows[:3]] + ["mc_missed"])
    files = [write_csv(out / "add_table.csv", header, rows)]
    files.append(write_json(out / "detector.json", {"mu_d_db": cc.mu_d, "h_db": cc.h, "p_fa": cc.p_fa,
                                                     "sigma_n_db": cc.sigma_n, "design_rate_mm_h": cc.design_rate}))
    if cfg.detect.series_file:
        series = ingest_series(cfg.detect.series_file)
        run = run_series(series.values, cc)
        files.append(write_csv(out / "cusum_series.csv",
                               ["timestamp_iso8601", "attenuation_db", "cusum_db", "alarmed"],
                               [[t.isoformat(), a, s, run.alarm_time is not None and i + 1 >= run.alarm_time]
                                for i, (t, a, s) in enumerate(zip(series.timestamps, series.values,
                                                                  run.trajectory))]))
        files.append(write_json(out / "series_report.json", {
            "samples": len(series),
            "alarm_index": run.alarm_time,
            "alarm_timestamp": None if run.alarm_time is None else series.timestamps[run.alarm_time - 1].isoformat(),
            "gaps": [[g.index, g.missing] for g in series.gaps],
        }))
    return files


def cmd_estimate(cfg: RunConfig, out: Path) -> list[Path]:
    link = cfg.link_config()
    rows = estimator_efficiency_experiment(cfg.experiment.estimate_rates, link, cfg.experiment.trials_estimator,
                                           cfg.rng_spec(), cfg.rain_prior(), cfg.noise_mode())
    files = [write_csv(out / "efficiency.csv",
                       ["rain_rate_mm_h", "mle_rmse_mm_h", "map_rmse_mm_h", "crb_rmse_mm_h", "bcrb_T1_rmse_mm_h",
                        "mle_over_crb", "map_over_crb", "median_iterations", "non_converged"],
                       [list(r) for r in rows])]
    if cfg.detect.series_file:
        series = ingest_series(cfg.detect.series_file)
        centre = FrequencyGrid((link.grid.center_frequency,), band_average=True,
                               band_coefficients=(cfg.link.k_bar, cfg.link.alpha_bar))
        sigma = link.reference_noise().sigma_n / math.sqrt(link.grid.size)
        prior = cfg.rain_prior()
        out_rows = []
        for t, a in zip(series.timestamps, series.values):
            mle = mle_newton([a], centre, link.geometry, sigma_n=sigma)
            mp = map_newton([a], centre, link.geometry, sigma_n=sigma, prior=prior)
            out_rows.append([t.isoformat(), a, mle.estimate, mle.converged, mp.estimate, mp.converged])
        files.append(write_csv(out / "series_estimates.csv",
                               ["timestamp_iso8601", "attenuation_db", "mle_mm_h", "mle_converged", "map_mm_h",
                                "map_converged"], out_rows))
    return files


def cmd_mc(cfg: RunConfig, out: Path) -> list[Path]:
    link = cfg.link_config()
    prior = cfg.rain_prior()
    spec = cfg.rng_spec()
    files = []
    noise_rows = []
    for i, mode in enumerate(NoiseMode):
        obs = gen_observation(AtmosphericState(0.0), link, mode, spec.substream(100 + i).generator(), 100_000)
        noise_rows.append([mode.value, float(np.mean(obs.std(axis=0)))])
    files.append(write_csv(out / "noise_check.csv", ["noise_mode", "clear_sky_std_db"], noise_rows))

    series = gen_rain_series(prior, 1_000_000, spec.substream(200).generator())
    ln = np.log(series)
    files.append(write_json(out / "rain_series_stats.json", {
        "samples": int(series.size),
        "mean_mm_h": float(series.mean()),
        "coeff_variation": float(series.std() / series.mean()),
        "lag1_autocorr_ln": float(np.corrcoef(ln[:-1], ln[1:])[0, 1]),
    }))

    window = max(cfg.prior.windows)
    scaling = multilink_scaling_experiment(cfg.experiment.link_counts, prior, link, TABLE_RATE, window)
    files.append(write_csv(out / "multilink.csv", ["n_links", f"bcrb_T{window}_rmse_mm_h"],
                           [list(r) for r in scaling]))
    big = [r for r in scaling if r.n_links >= 10]
    fusion = fusion_experiment(max(cfg.experiment.link_counts), link, TABLE_RATE, cfg.experiment.trials_fusion,
                               spec.substream(300))
    files.append(write_json(out / "multilink_summary.json", {
        "loglog_slope_n_ge_10": loglog_slope([r.n_links for r in big], [r.rmse for r in big]) if len(big) > 1
        else None,
        "fusion_links": fusion.n_links,
        "fusion_mc_rmse_mm_h": fusion.mc_rmse,
        "fusion_predicted_rmse_mm_h": fusion.predicted_rmse,
    }))

    cc = cfg.cusum_config()
    gm = cusum_delay_experiment(cfg.experiment.detect_rates, cc, cfg.experiment.trials_cusum, spec.substream(400),
                                onset="gauss_markov", prior=prior)
    files.append(write_csv(out / "cusum_gauss_markov_onset.csv",
                           ["rain_rate_mm_h", "wald_add_min", "mc_add_min", "mc_over_wald", "pd_5min", "pd_10min",
                            "pd_30min", "missed"], [list(r) for r in gm]))
    arl = arl0_experiment(cc, runs=200, rng=spec.substream(500))
    files.append(write_json(out / "arl0.json", {"mean_run_length_min": arl.mean_run_length, "runs": arl.runs,
                                                "censored": arl.censored, "nominal_min": arl.nominal}))
    return files


COMMANDS: dict[str, Callable[[RunConfig, Path], list[Path]]] = {
    "bounds": cmd_bounds,
    "geometry": cmd_geometry,
    "alloc": cmd_alloc,
    "detect": cmd_detect,
    "estimate": cmd_estimate,
    "mc": cmd_mc,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg: RunConfig, files: list[Path]) -> Path:
    return write_json(out / "manifest.json", {
        "command": command,
        "config_sha256": cfg.digest(),
        "seed": cfg.run.seed,
        "stream_id": cfg.run.stream_id,
        "versions": {"rainbound": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "files": {p.name: _sha256(p) for p in sorted(files)},
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rainbound", description=__doc__.splitlines()[0])
    parser.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="run configuration file (defaults built in)")
    parser.add_argument("--out", type=Path, help="output directory (default: [run] out_dir)")
    parser.add_argument("--seed", type=int, help="override [run] seed")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--band-average", dest="coefficients", action="store_const", const="band_average")
    mode.add_argument("--full-p838", dest="coefficients", action="store_const", const="full_p838")
    parser.add_argument("--noise-mode", choices=("db", "chi2"))
    parser.add_argument("--write-default-config", type=Path, metavar="FILE",
                        help="write the default configuration to FILE and exit")
    return parser


def _resolve(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = cfg.replace("run", seed=args.seed)
    if args.coefficients:
        cfg = cfg.replace("link", coefficient_mode=args.coefficients)
    if args.noise_mode:
        cfg = cfg.replace("experiment", noise_mode={"db": "db_gaussian", "chi2": "chi_squared_pilot"}[args.noise_mode])
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.write_default_config:
        args.write_default_config.write_text(RunConfig().serialize(), encoding="utf-8")
        return 0
    if args.command is None:
        parser.error("a command is required")
    try:
        cfg = _resolve(args)
        out = args.out or Path(cfg.run.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, out)
        write_manifest(out, args.command, cfg, files)
    except ConfigError as exc:
        print(f"rainbound: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"rainbound: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"rainbound: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"rainbound: I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
