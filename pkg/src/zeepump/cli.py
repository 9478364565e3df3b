"""Command-line front end: config in, CSV/JSON curves and figures out.

Subcommands::

    zeepump branching  --theta-min --theta-max --step [--optimize]
    zeepump spectrum   [--phi PHI] [--phi-scan] [--noise-level S]
    zeepump fit        --model {voigt4,polarization,recovery} --data FILE
    zeepump pump       [--delays MS [MS ...]]

Global flags: --config PATH (JSON), --out DIR, --seed N, --no-plots.
Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
Every run echoes the fully resolved configuration into the output
directory, and outputs are byte-identical across reruns with the same
config and seed.
"""

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import branching, fitting, pump, spectrum
from .config import ConfigError, load_run_config
from .fitting import FittingError
from .pump import SimulationError

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeepump", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--out", type=Path, default=Path("zeepump_out"), help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic fixture generation")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("branching", help="branching ratios versus field angle")
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=90.0)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--misalignment", type=float, default=0.0,
                   help="field misalignment added to every nominal angle (deg)")
    p.add_argument("--optimize", action="store_true",
                   help="append the angle maximizing R_par")

    p = sub.add_parser("spectrum", help="synthesize the four-line absorption spectrum")
    p.add_argument("--phi", type=float, default=None, help="override polarization angle (deg)")
    p.add_argument("--phi-scan", action="store_true",
                   help="also write pair depths versus polarization angle")
    p.add_argument("--noise-level", type=float, default=0.0,
                   help="additive Gaussian noise, relative to the peak depth (fixture generation)")

    p = sub.add_parser("fit", help="fit a data file with one of the models")
    p.add_argument("--model", choices=("voigt4", "polarization", "recovery"), required=True)
    p.add_argument("--data", type=Path, required=True, help="CSV data file")
    p.add_argument("--components", type=int, default=2, choices=(1, 2),
                   help="exponential components for the recovery model")

    p = sub.add_parser("pump", help="simulate swept-laser optical pumping")
    p.add_argument("--delays", type=float, nargs="+", metavar="MS",
                   default=[1.3, 3.0, 6.0, 12.0, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0],
                   help="pump-off delays in ms for the residual curve")
    return parser


def _write_csv(path, header, rows, fmt: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:{fmt}}" for v in row) + "\n")


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pair_depths(cfg):
    """Resolve the four line-pair peak depths from the optics config."""
    opt = cfg.optics
    if opt.depth_mode == "measured":
        return opt.depth_pi_ad, opt.depth_pi_bc, opt.depth_sigma_ad, opt.depth_sigma_bc
    coeffs = branching.lambda_system(cfg.ground_g, cfg.excited_g, cfg.field)
    table = branching.transition_table(coeffs, 1.0, 0.5)
    return (table["a"].strength_pi * opt.depth_pi_total,
            table["b"].strength_pi * opt.depth_pi_total,
            table["a"].strength_sigma * opt.depth_sigma_total,
            table["b"].strength_sigma * opt.depth_sigma_total)


def _line_centers(cfg) -> np.ndarray:
    from .zeeman import zeeman_splitting

    coeffs = branching.lambda_system(cfg.ground_g, cfg.excited_g, cfg.field)
    table = branching.transition_table(
        coeffs,
        zeeman_splitting(cfg.ground_g, cfg.field),
        zeeman_splitting(cfg.excited_g, cfg.field),
    )
    return table.offsets_ghz


def cmd_branching(args, cfg, out: Path) -> int:
    if args.step <= 0:
        print("error: --step must be > 0", file=sys.stderr)
        return EXIT_USAGE
    if not (0 <= args.theta_min <= args.theta_max <= 90):
        print("error: need 0 <= theta-min <= theta-max <= 90", file=sys.stderr)
        return EXIT_USAGE
    grid = np.arange(args.theta_min, args.theta_max + args.step / 2, args.step)
    grid = grid[grid <= 90.0 + 1e-12]
    rows = branching.branching_scan(cfg.ground_g, cfg.excited_g,
                                    cfg.field.magnitude_tesla, grid,
                                    misalignment_deg=args.misalignment)
    optimum = None
    if args.optimize:
        theta_star, r_star = branching.optimal_angle(cfg.ground_g, cfg.excited_g,
                                                     cfg.field.magnitude_tesla)
        scan = branching.branching_scan(cfg.ground_g, cfg.excited_g,
                                        cfg.field.magnitude_tesla, [theta_star])
        rows.append(scan[0])
        optimum = (theta_star, r_star)
        print(f"optimal angle: {theta_star:.2f} deg, R_par = {r_star:.4f}")
    _write_csv(out / "branching.csv", ["theta_deg", "r_parallel", "r_perpendicular"],
               rows, cfg.float_format)
    if cfg.plots:
        from . import plots
        plots.plot_branching_curve([r for r in rows if math.isfinite(r[1])],
                                   out / "branching.png", optimum=optimum)
    return EXIT_OK


def cmd_spectrum(args, cfg, out: Path, seed: int) -> int:
    phi = cfg.optics.phi_deg if args.phi is None else args.phi
    d_pi_ad, d_pi_bc, d_sig_ad, d_sig_bc = _pair_depths(cfg)
    centers = _line_centers(cfg)
    spec = spectrum.synthesize_four_lines(
        centers_ghz=centers,
        depths_pi=[d_pi_ad, d_pi_bc, d_pi_bc, d_pi_ad],
        depths_sigma=[d_sig_ad, d_sig_bc, d_sig_bc, d_sig_ad],
        shape=cfg.optics.line_shape,
        phi_deg=phi,
        grid_ghz=cfg.optics.grid_ghz,
        baseline=cfg.optics.baseline,
        metadata={"magnitude_tesla": cfg.field.magnitude_tesla,
                  "theta_deg": cfg.field.theta_deg,
                  "line_centers_ghz": [float(c) for c in centers],
                  "noise_level": args.noise_level, "seed": seed},
    )
    if args.noise_level > 0:
        rng = np.random.default_rng(seed)
        sigma = args.noise_level * float(spec.depth.max())
        noisy = np.clip(spec.depth + rng.normal(0.0, sigma, spec.depth.size), 0.0, None)
        spec = spectrum.AbsorptionSpectrum(spec.frequency_ghz, noisy, spec.metadata)
    spec.to_csv(out / "spectrum.csv", cfg.float_format)
    spec.write_metadata(out / "spectrum_meta.json")
    if cfg.plots:
        from . import plots
        plots.plot_spectrum(spec, out / "spectrum.png",
                            title=f"theta={cfg.field.theta_deg:g} deg, phi={phi:g} deg")

    if args.phi_scan:
        phis = np.arange(0.0, 180.0 + 0.5, 1.0)
        d_ad = spectrum.polarization_depth(d_pi_ad, d_sig_ad, phis)
        d_bc = spectrum.polarization_depth(d_pi_bc, d_sig_bc, phis)
        _write_csv(out / "phi_scan.csv", ["phi_deg", "depth_ad", "depth_bc"],
                   zip(phis, d_ad, d_bc), cfg.float_format)
        if cfg.plots:
            from . import plots
            plots.plot_phi_scan(phis, d_ad, d_bc, out / "phi_scan.png")
    return EXIT_OK


def _read_csv_columns(path: Path, n_min: int = 2):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path}: {exc}") from exc
    if data.dtype.names is None or len(data.dtype.names) < n_min:
        raise ConfigError(f"{path}: expected a CSV header with at least {n_min} columns")
    cols = [np.atleast_1d(data[name]) for name in data.dtype.names[:n_min]]
    if any(not np.all(np.isfinite(c)) for c in cols):
        raise ConfigError(f"{path}: data contains non-finite or non-numeric entries")
    return cols


def cmd_fit(args, cfg, out: Path) -> int:
    if args.model == "voigt4":
        x, y = _read_csv_columns(args.data)
        spec = spectrum.AbsorptionSpectrum(frequency_ghz=x, depth=np.clip(y, 0.0, None))
        init = fitting.estimate_four_voigt_init(spec, fallback_centers=_line_centers(cfg))
        result = fitting.fit_four_voigt(spec, init)
        label, xlabel, ylabel = "branching_ratio", "frequency offset (GHz)", "absorption depth"
        model_y = fitting.four_voigt_depth(x, result.values(), False, init.lorentzian_fwhm_ghz)
    elif args.model == "polarization":
        x, y = _read_csv_columns(args.data)
        result = fitting.fit_polarization_model(x, y)
        label, xlabel, ylabel = None, "polarization angle (deg)", "absorption depth"
        model_y = fitting.polarization_model(x, result.values())
    else:
        x, y = _read_csv_columns(args.data)
        result = fitting.fit_exponential_recovery(x, y, components=args.components)
        label, xlabel, ylabel = "zero_delay_value", "delay (ms)", "remaining fraction"
        model_y = fitting.exponential_recovery(x, result.values())

    _write_json(out / "fit_report.json", result.to_json_dict())
    if label and label in result.derived:
        value, err = result.derived[label]
        print(f"{label} = {value:.4f} +/- {err:.4f}")
    for name in result.parameter_names:
        print(f"  {name} = {result.parameters[name]:.6g} +/- {result.standard_errors[name]:.3g}")
    if cfg.plots:
        from . import plots
        plots.plot_fit(x, y, x, model_y, out / "fit.png", xlabel, ylabel)
    if not result.converged:
        print("warning: fit did not converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_pump(args, cfg, out: Path) -> int:
    if any(d < 0 for d in args.delays):
        print("error: delays must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    result = pump.simulate_pump(cfg.pump)
    pump.write_populations_csv(result, out / "populations.csv", cfg.float_format)
    result.hole.to_csv(out / "hole_spectrum.csv", cfg.float_format)
    result.antihole.to_csv(out / "antihole_spectrum.csv", cfg.float_format)

    delays_s = np.asarray(args.delays, dtype=float) * 1e-3
    fractions = pump.residual_curve(result, delays_s)
    _write_csv(out / "residual_vs_delay.csv", ["delay_ms", "residual_fraction"],
               zip(np.asarray(args.delays, dtype=float), fractions), cfg.float_format)

    # zero-delay extrapolation from the internally sampled recovery curve
    curve_t_ms = result.residual_delays_s[1:] * 1e3
    curve_y = result.residual_fractions[1:]
    components = max(1, min(2, len(cfg.pump.spin_relaxation)))
    fit = fitting.fit_exponential_recovery(curve_t_ms, curve_y, components=components)
    extrapolated, extrapolated_err = fit.derived["zero_delay_value"]

    summary = dict(result.polarization)
    summary.update({
        "residual_zero_delay_extrapolated": float(extrapolated),
        "residual_zero_delay_extrapolated_error": float(extrapolated_err),
        "hole_fwhm_mhz": pump.hole_fwhm_mhz(result.hole),
        "max_population_drift": result.max_population_drift,
        "fitted_time_constants_ms": [float(fit.parameters[f"tau_{i + 1}_ms"])
                                     for i in range(components)],
    })
    _write_json(out / "summary.json", summary)
    print(f"spin polarization: {summary['spin_polarization_percent']:.2f} %")
    print(f"residual fraction at zero delay: {summary['residual_zero_delay']:.4f}"
          f" (extrapolated {extrapolated:.4f})")

    if cfg.plots:
        from . import plots
        fit_t = np.geomspace(max(curve_t_ms[0], 1e-2), curve_t_ms[-1], 200)
        plots.plot_hole(result.hole, result.antihole, out / "hole.png")
        plots.plot_recovery(np.asarray(args.delays, dtype=float), fractions, out / "recovery.png",
                            fit_curve=(fit_t, fitting.exponential_recovery(fit_t, fit.values())))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        cfg = load_run_config(args.config)
        if args.no_plots:
            cfg = dataclasses.replace(cfg, plots=False)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        echoed = dict(cfg.raw)
        echoed["seed"] = args.seed
        _write_json(out / "resolved_config.json", echoed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "branching":
            return cmd_branching(args, cfg, out)
        if args.command == "spectrum":
            return cmd_spectrum(args, cfg, out, args.seed)
        if args.command == "fit":
            return cmd_fit(args, cfg, out)
        if args.command == "pump":
            return cmd_pump(args, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FittingError, SimulationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    raise AssertionError(f"unhandled command {args.command!r}")


def app() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    app()
