"""Command-line front end: sweeps, figure-reproduction recipes, CSV output.

Every CSV is written with a sibling ``<name>.manifest.json`` recording the
command, the fully resolved configuration, the seed and the tool version;
re-running a manifest's command reproduces the CSV byte for byte (manifests
carry no timestamps and all randomness is seeded).

Exit codes: 0 success; 2 usage errors (argparse); 3 at least one requested
computation raised an infeasibility flag (outputs are still written);
4 config validation failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aom import attenuation_vs_frequency, calibrate
from .attack import per_station_gain, system_gain_factor, gain_from_physics
from .config import AppConfig, load_config, resolved_tree, validate_config
from .keyrate_sns import sns_distance_sweep, sns_key_rate
from .keyrate_tf import plob_bound, tf_distance_sweep, tf_key_rate
from .opll import heterodyne_spectrum, run_opll

EXIT_OK = 0
EXIT_INFEASIBLE = 3
EXIT_INVALID_CONFIG = 4

CONFIG_ENV_VAR = "WSATTACK_CONFIG"


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, (np.bool_,)):
        return "1" if value else "0"
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _plob_column(channel) -> float:
    """Repeaterless capacity of the direct channel; inf at zero loss."""
    eta_channel = 10.0 ** (-channel.alpha * channel.length_km / 10.0)
    if eta_channel >= 1.0:
        return math.inf
    return plob_bound(eta_channel)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_manifest(csv_path: Path, command: str, config: AppConfig, seed) -> None:
    manifest = {
        "command": command,
        "config": resolved_tree(config),
        "seed": seed,
        "outputs": [csv_path.name],
        "version": __version__,
    }
    manifest_path = csv_path.parent / (csv_path.stem + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def parse_sweep(spec: str, expect_var: str | None = None):
    """Parse ``VAR:START:STOP:STEP`` into (var, inclusive grid)."""
    parts = spec.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"sweep must look like VAR:START:STOP:STEP, got {spec!r}"
        )
    var = parts[0]
    if expect_var is not None and var != expect_var:
        raise argparse.ArgumentTypeError(f"expected sweep variable {expect_var!r}")
    try:
        start, stop, step = (float(p) for p in parts[1:])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need STOP >= START and STEP > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return var, [start + i * step for i in range(count)]


def _resolve_g(args, config: AppConfig) -> float:
    if getattr(args, "g", None) is not None:
        return args.g
    if getattr(args, "f_delta", None) is not None:
        return system_gain_factor(args.f_delta, args.f_delta, config.gain_table)
    return 1.0


def _load(args) -> AppConfig:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    return load_config(path)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_keyrate(args) -> int:
    config = _load(args)
    g = _resolve_g(args, config)
    scenario = config.tf if args.protocol == "tf" else config.sns
    _, grid = parse_sweep(args.sweep, "distance")
    out = _outdir(args)

    if args.protocol == "tf":
        report = tf_distance_sweep(scenario, g, grid)
        rows = []
        for point in report.points:
            channel = scenario.channel.at_distance(point.sweep_value)
            est = point.estimated
            rows.append([
                point.sweep_value, point.r_estimated, point.r_true,
                _plob_column(channel),
                est.q_mu[0] if est else None, est.e_mu[0] if est else None,
                est.y1_l if est else None, est.e1_u if est else None,
            ])
        header = ["L_km", "r_estimated", "r_true", "plob",
                  "q_mu0_obs", "e_mu0_obs", "y1_l", "e1_u"]
        csv_path = out / "keyrate_tf.csv"
    else:
        report = sns_distance_sweep(scenario, g, grid)
        rows = [
            [p.sweep_value, p.r_estimated, p.r_true,
             p.estimated.s1_l if p.estimated else None,
             p.estimated.e1_u if p.estimated else None,
             p.estimated.e_z if p.estimated else None]
            for p in report.points
        ]
        header = ["L_km", "r_estimated", "r_true", "s1_l", "e1_u", "e_z"]
        csv_path = out / "keyrate_sns.csv"

    write_csv(csv_path, header, rows)
    write_manifest(csv_path, f"keyrate {args.protocol} --sweep {args.sweep} --g {g!r}",
                   config, None)
    print(f"wrote {csv_path}")
    return EXIT_INFEASIBLE if report.any_infeasible else EXIT_OK


def cmd_aom_attenuation(args) -> int:
    config = _load(args)
    var, grid = parse_sweep(args.sweep)
    out = _outdir(args)
    if var == "frequency":
        rows = [
            [f, attenuation_vs_frequency(f, config.aom.physics),
             float(config.aom.frequency_attenuation(f))]
            for f in grid
        ]
        header = ["frequency_mhz", "attenuation_db", "attenuation_operating_db"]
        csv_path = out / "aom_attenuation_frequency.csv"
    elif var == "voltage":
        rows = [[v, float(config.aom.voltage_table.attenuation(v, warn=False))]
                for v in grid]
        header = ["voltage_v", "attenuation_db"]
        csv_path = out / "aom_attenuation_voltage.csv"
    else:
        print(f"unknown sweep variable {var!r} (use frequency or voltage)",
              file=sys.stderr)
        return 2
    write_csv(csv_path, header, rows)
    write_manifest(csv_path, f"aom attenuation --sweep {args.sweep}", config, None)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_aom_calibrate(args) -> int:
    config = _load(args)
    _, v_grid = parse_sweep("v:" + args.v_grid)
    _, f_grid = parse_sweep("f:" + args.f_grid)
    v_opt, f_opt = calibrate(config.aom, v_grid, f_grid)
    out = _outdir(args)
    csv_path = out / "aom_calibration.csv"
    write_csv(csv_path, ["v_opt_v", "f_opt_mhz"], [[v_opt, f_opt]])
    write_manifest(csv_path,
                   f"aom calibrate --v-grid {args.v_grid} --f-grid {args.f_grid}",
                   config, None)
    print(f"v_opt = {v_opt} V, f_opt = {f_opt} MHz")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_attack_gain(args) -> int:
    config = _load(args)
    if args.sweep:
        _, grid = parse_sweep(args.sweep, "f_delta")
    else:
        grid = [args.f_delta if args.f_delta is not None
                else config.attack.f_delta_mhz]
    rows = [
        [fd, per_station_gain(fd, config.gain_table),
         system_gain_factor(fd, fd, config.gain_table),
         gain_from_physics(fd, config.aom)]
        for fd in grid
    ]
    header = ["f_delta_mhz", "per_station_gain", "system_gain_factor",
              "physics_gain_aom_output"]
    if args.out is None:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(v) for v in row))
        return EXIT_OK
    out = _outdir(args)
    csv_path = out / "attack_gain.csv"
    write_csv(csv_path, header, rows)
    write_manifest(csv_path, f"attack gain --sweep {args.sweep}", config, None)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_opll_simulate(args) -> int:
    import dataclasses

    config = _load(args)
    attack = config.attack
    if args.f_delta is not None:
        attack = dataclasses.replace(
            attack, f_aom2_mhz=attack.f_aom1_mhz - args.f_delta
        )
    if args.rs is not None:
        attack = dataclasses.replace(attack, switch_rate_khz=args.rs)
    trace = run_opll(config.opll, attack, config.aom, args.duration, seed=args.seed)
    out = _outdir(args)

    trace_path = out / "opll_trace.csv"
    rows = zip(trace.t_us, trace.locked, trace.aom_cmd_mhz,
               trace.pzt_offset_mhz, trace.power_mw)
    write_csv(trace_path, ["t_us", "locked", "aom_cmd_mhz", "pzt_mhz", "power_mw"], rows)
    write_manifest(trace_path,
                   f"opll simulate --f-delta {attack.f_delta_mhz} "
                   f"--rs {attack.switch_rate_khz} --duration {args.duration} "
                   f"--seed {args.seed}",
                   config, args.seed)

    spectrum_path = out / "opll_spectrum.csv"
    peaks = heterodyne_spectrum(trace)
    write_csv(spectrum_path, ["freq_mhz", "power_dbm"], peaks)
    write_manifest(spectrum_path,
                   f"opll spectrum --f-delta {attack.f_delta_mhz} "
                   f"--rs {attack.switch_rate_khz} --duration {args.duration} "
                   f"--seed {args.seed}",
                   config, args.seed)
    print(f"wrote {trace_path} and {spectrum_path}")
    return EXIT_OK


def _reproduce_fig2a(config: AppConfig, out: Path):
    grid = [0.5 * i for i in range(481)]
    rows = [[f, attenuation_vs_frequency(f, config.aom.physics)] for f in grid]
    path = out / "fig2a_attenuation_vs_frequency.csv"
    write_csv(path, ["frequency_mhz", "attenuation_db"], rows)
    return path, False


def _reproduce_fig4(config: AppConfig, out: Path):
    table = config.gain_table
    rows = list(zip(table.f_delta_mhz, table.gain))
    path = out / "fig4_gain_vs_f_delta.csv"
    write_csv(path, ["f_delta_mhz", "gain_fraction"], rows)
    return path, False


def _reproduce_fig5(config: AppConfig, out: Path):
    g = system_gain_factor(30.0, 30.0, config.gain_table)
    grid = [10.0 * i for i in range(61)]
    report = tf_distance_sweep(config.tf, g, grid)
    rows = []
    for point in report.points:
        channel = config.tf.channel.at_distance(point.sweep_value)
        est = point.estimated
        rows.append([
            point.sweep_value, point.r_estimated, point.r_true,
            _plob_column(channel),
            est.q_mu[0] if est else None,
            est.e_mu[0] if est else None,
            est.y1_l if est else None,
            est.e1_u if est else None,
        ])
    path = out / "fig5_tf_keyrate_vs_distance.csv"
    write_csv(path, ["L_km", "r_estimated", "r_true", "plob",
                     "q_mu0_obs", "e_mu0_obs", "y1_l", "e1_u"], rows)
    return path, report.any_infeasible


def _reproduce_fig6(config: AppConfig, out: Path):
    params = config.tf.at_distance(560.0)
    rows = []
    infeasible = False
    for i in range(61):
        fd = 0.5 * i
        g = system_gain_factor(fd, fd, config.gain_table)
        point = tf_key_rate(params, g)
        infeasible = infeasible or point.infeasible
        rows.append([fd, g, point.r_estimated, point.r_true])
    path = out / "fig6_tf_keyrate_vs_f_delta.csv"
    write_csv(path, ["f_delta_mhz", "g", "r_estimated", "r_true"], rows)
    return path, infeasible


def _reproduce_fig7(config: AppConfig, out: Path):
    g = system_gain_factor(30.0, 30.0, config.gain_table)
    grid = [10.0 * i for i in range(91)]
    report = sns_distance_sweep(config.sns, g, grid)
    rows = [
        [p.sweep_value, p.r_estimated, p.r_true,
         p.estimated.s1_l if p.estimated else None,
         p.estimated.e1_u if p.estimated else None,
         p.estimated.e_z if p.estimated else None]
        for p in report.points
    ]
    path = out / "fig7_sns_keyrate_vs_distance.csv"
    write_csv(path, ["L_km", "r_estimated", "r_true", "s1_l", "e1_u", "e_z"], rows)
    return path, report.any_infeasible


FIGURE_RECIPES = {
    "fig2a": _reproduce_fig2a,
    "fig4": _reproduce_fig4,
    "fig5": _reproduce_fig5,
    "fig6": _reproduce_fig6,
    "fig7": _reproduce_fig7,
}


def reproduce_figure(figure_id: str, config: AppConfig, out: Path):
    """Run the documented parameter recipe for one figure dataset."""
    try:
        recipe = FIGURE_RECIPES[figure_id]
    except KeyError:
        raise ValueError(
            f"unknown figure id {figure_id!r}; known: {sorted(FIGURE_RECIPES)}"
        ) from None
    return recipe(config, out)


def cmd_reproduce(args) -> int:
    config = _load(args)
    out = _outdir(args)
    path, infeasible = reproduce_figure(args.figure, config, out)
    write_manifest(path, f"reproduce {args.figure}", config, None)
    print(f"wrote {path}")
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_validate(args) -> int:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        print("no config file given; built-in defaults are always valid")
        return EXIT_OK
    issues = validate_config(path)
    if not issues:
        print("config ok")
        return EXIT_OK
    for issue in issues:
        print(str(issue), file=sys.stderr)
    return EXIT_INVALID_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsattack",
        description="Wavelength-switching attack toolkit for twin-field QKD",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=False):
        p.add_argument("--config", help="YAML config file (env "
                       f"{CONFIG_ENV_VAR} overrides the default path)")
        p.add_argument("--out", default="out", help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("keyrate", help="estimated-vs-true key-rate sweeps")
    p.add_argument("protocol", choices=["tf", "sns"])
    p.add_argument("--sweep", default="distance:0:600:10",
                   help="distance:START:STOP:STEP in km")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--g", type=float, help="brightness factor g >= 1")
    group.add_argument("--f-delta", type=float, dest="f_delta",
                       help="symmetric attack shift in MHz (implies g)")
    add_common(p)
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("aom", help="modulator attenuation tools")
    aom_sub = p.add_subparsers(dest="aom_command", required=True)
    pa = aom_sub.add_parser("attenuation", help="attenuation sweep CSV")
    pa.add_argument("--sweep", default="frequency:0:240:0.5",
                    help="frequency:START:STOP:STEP or voltage:START:STOP:STEP")
    add_common(pa)
    pa.set_defaults(func=cmd_aom_attenuation)
    pc = aom_sub.add_parser("calibrate", help="loss-minimizing calibration scan")
    pc.add_argument("--v-grid", default="1:15:0.01", help="START:STOP:STEP volts")
    pc.add_argument("--f-grid", default="150:240:0.5", help="START:STOP:STEP MHz")
    add_common(pc)
    pc.set_defaults(func=cmd_aom_calibrate)

    p = sub.add_parser("attack", help="attack gain lookups")
    attack_sub = p.add_subparsers(dest="attack_command", required=True)
    pg = attack_sub.add_parser("gain", help="per-station and system gain")
    pg.add_argument("--f-delta", type=float, dest="f_delta")
    pg.add_argument("--rs", type=float, help="switching rate in kHz (recorded only)")
    pg.add_argument("--sweep", help="f_delta:START:STOP:STEP")
    pg.add_argument("--config")
    pg.add_argument("--out", default=None)
    pg.set_defaults(func=cmd_attack_gain)

    p = sub.add_parser("opll", help="loop simulation")
    opll_sub = p.add_subparsers(dest="opll_command", required=True)
    ps = opll_sub.add_parser("simulate", help="simulate the locked loop")
    ps.add_argument("--f-delta", type=float, dest="f_delta", help="shift in MHz")
    ps.add_argument("--rs", type=float, help="switching rate in kHz")
    ps.add_argument("--duration", type=float, default=500.0, help="microseconds")
    add_common(ps, seed=True)
    ps.set_defaults(func=cmd_opll_simulate)

    p = sub.add_parser("reproduce", help="figure-reproduction recipes")
    p.add_argument("figure", choices=sorted(FIGURE_RECIPES))
    add_common(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("--config")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
