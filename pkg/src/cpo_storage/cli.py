"""Command-line interface.

Subcommands: ``dispersion`` (group-velocity/transmission scan), ``response``
(exact vs adiabatic susceptibilities), ``store`` (storage-sequence traces),
``sweep-depth`` and ``sweep-switch`` (efficiency sweeps), ``validate``
(cross-module oracle checks).  Every run writes its outputs plus a
``resolved_config.json`` capturing all defaulted values in internal units.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .config import RunConfig, fmt, load_config, write_csv, write_json
from .core import (
    AliasingError,
    ConfigError,
    NonConvergence,
    StabilityError,
    ValidityError,
    WindowError,
    cpo_linewidth,
)
from .linear_response import (
    DispersionScan,
    adiabatic_response,
    dispersion_scan,
    exact_response,
)
from .protocol import StorageSpec, storage_run, sweep_depth, sweep_switch
from .steady_state import omega_d_for_saturation

PRESETS = ("he_star_fig2", "he_star_fig3", "he_star_figS1a", "he_star_figS1b")

_NUMERIC_ERRORS = (
    StabilityError,
    WindowError,
    NonConvergence,
    AliasingError,
    ValidityError,
)


def _load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("cpo_storage.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        raw = args.config
    elif args.preset:
        raw = _load_preset(args.preset)
    else:
        raw = {}
    workers = args.workers if args.workers else 1
    return load_config(raw, workers=workers, units_override=args.units)


def _emit_resolved(cfg: RunConfig, out: Path, extra: dict | None = None) -> None:
    resolved = cfg.resolved_dict()
    if extra:
        resolved["params"] = {**resolved.get("params", {}), **extra}
    write_json(out / "resolved_config.json", resolved)


def _storage_spec(cfg: RunConfig) -> StorageSpec:
    p = cfg.params
    us = cfg.us
    medium = cfg.medium
    if "depth" in p:
        medium = medium.with_depth(float(p["depth"]))
    t_end = p.get("t_end_us")
    return StorageSpec(
        medium=medium,
        s_in=float(p.get("s_in", 0.1)),
        signal_tau=float(p.get("signal_tau_us", 2.0)) * us,
        t_cut=float(p.get("t_cut_us", 6.0)) * us,
        storage=float(p.get("storage_us", 2.0)) * us,
        t_end=float(t_end) * us if t_end is not None else None,
        tau_sw=float(p.get("tau_sw_us", 0.05)) * us,
        signal_ratio=float(p.get("signal_ratio", 1e-3)),
        n_z=int(p.get("n_z", 64)),
        dt=float(p.get("dt", 0.05)),
        solver_mode=p.get("solver_mode", "coherence-eliminated"),
        signal_delta=float(p.get("signal_delta", 0.0)),
    )


def cmd_dispersion(args) -> int:
    cfg = _config(args)
    p = cfg.params
    s_values = np.geomspace(
        float(p.get("s_min", 1e-3)), float(p.get("s_max", 1e3)), int(p.get("n_s", 121))
    )
    scan = dispersion_scan(cfg.medium, s_values, mode=p.get("mode", "supplement"))
    out = _out_dir(args)
    write_csv(out / "dispersion.csv", DispersionScan.COLUMNS, scan.rows())
    _emit_resolved(cfg, out, {"singular_bins": list(scan.singular_bins)})
    if scan.singular_bins:
        print(
            f"note: {len(scan.singular_bins)} singular velocity bin(s) at "
            f"s = {[float(scan.s[i]) for i in scan.singular_bins]}",
            file=sys.stderr,
        )
    print(out / "dispersion.csv")
    return 0


def cmd_response(args) -> int:
    cfg = _config(args)
    p = cfg.params
    s = float(p.get("s", 0.1))
    om_d = omega_d_for_saturation(cfg.medium, s)
    dcpo = cpo_linewidth(cfg.medium, om_d)
    w = np.linspace(0.0, float(p.get("omega_max_over_dcpo", 0.5)), int(p.get("n_omega", 101))) * dcpo
    chi_d_e, chi_s_e = exact_response(cfg.medium, s, w)
    chi_d_a, chi_s_a = adiabatic_response(cfg.medium, s, w)
    cols = (
        "omega",
        "omega_over_dcpo",
        "chi_delta_exact_re",
        "chi_delta_exact_im",
        "chi_delta_adiabatic_re",
        "chi_delta_adiabatic_im",
        "chi_sigma_exact_re",
        "chi_sigma_exact_im",
        "chi_sigma_adiabatic_re",
        "chi_sigma_adiabatic_im",
    )
    rows = (
        (
            w[i],
            w[i] / dcpo,
            chi_d_e[i].real,
            chi_d_e[i].imag,
            chi_d_a[i].real,
            chi_d_a[i].imag,
            chi_s_e[i].real,
            chi_s_e[i].imag,
            chi_s_a[i].real,
            chi_s_a[i].imag,
        )
        for i in range(w.size)
    )
    out = _out_dir(args)
    write_csv(out / "response.csv", cols, rows)
    _emit_resolved(cfg, out, {"s": s, "delta_cpo": dcpo})
    print(out / "response.csv")
    return 0


def cmd_store(args) -> int:
    cfg = _config(args)
    spec = _storage_spec(cfg)
    res = storage_run(spec)
    out = _out_dir(args)
    write_csv(
        out / "storage_traces.csv",
        res.CSV_COLUMNS,
        res.csv_rows(cfg.gamma0_si),
    )
    _emit_resolved(
        cfg,
        out,
        {
            "efficiency": res.efficiency,
            "efficiency_error": res.efficiency_error,
            "s_in": res.s_in,
            "s_out": res.s_out,
            "optical_depth": res.optical_depth,
        },
    )
    print(out / "storage_traces.csv")
    return 0


def cmd_sweep_depth(args) -> int:
    cfg = _config(args)
    p = cfg.params
    spec = _storage_spec(cfg)
    depths = [float(x) for x in p.get(
        "depths", [0.3, 0.6, 1.0, 1.5, 2.2, 3.2, 4.4, 6.2, 8.0]
    )]
    s_values = [float(x) for x in p.get("s_in_values", [0.1, 0.3, 1.0, 2.0])]
    rows = sweep_depth(spec, depths, s_values, workers=cfg.workers)
    out = _out_dir(args)
    write_csv(
        out / "sweep_depth.csv",
        ("depth", "s_in", "s_out", "efficiency"),
        ((r.depth, r.s_in, r.s_out, r.efficiency) for r in rows),
    )
    errors = {f"{r.depth}:{r.s_in}": r.error for r in rows if r.error}
    _emit_resolved(cfg, out, {"point_errors": errors})
    print(out / "sweep_depth.csv")
    return 0


def cmd_sweep_switch(args) -> int:
    cfg = _config(args)
    p = cfg.params
    spec = _storage_spec(cfg)
    taus = [float(x) for x in p.get("tau_sw_values", [0.01, 0.1, 1.0, 3.0, 10.0])]
    edges = p.get("edges", ["storage", "retrieval"])
    all_rows = []
    for edge in edges:
        all_rows.extend(sweep_switch(spec, taus, edge=edge, workers=cfg.workers))
    out = _out_dir(args)
    write_csv(
        out / "sweep_switch.csv",
        ("tau_sw_over_inv_dcpo", "edge", "efficiency"),
        ((r.tau_sw_over_inv_dcpo, r.edge, r.efficiency) for r in all_rows),
    )
    errors = {f"{r.edge}:{r.tau_sw_over_inv_dcpo}": r.error for r in all_rows if r.error}
    _emit_resolved(cfg, out, {"point_errors": errors})
    print(out / "sweep_switch.csv")
    return 0


def cmd_validate(args) -> int:
    from .validate import run_all_checks

    cfg = _config(args)
    results = run_all_checks(cfg.medium)
    out = _out_dir(args)
    report = []
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        report.append({"check": name, "passed": ok, "detail": detail})
        failed += 0 if ok else 1
    write_json(out / "validate_report.json", report)
    _emit_resolved(cfg, out)
    if failed:
        print(
            json.dumps({"error": "ValidationFailure", "failed_checks": failed}),
            file=sys.stderr,
        )
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpo-storage",
        description="CPO light-storage simulator: dispersion, storage sequences, sweeps.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    commands = {
        "dispersion": cmd_dispersion,
        "response": cmd_response,
        "store": cmd_store,
        "sweep-depth": cmd_sweep_depth,
        "sweep-switch": cmd_sweep_switch,
        "validate": cmd_validate,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--preset", type=str, default=None, choices=PRESETS)
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--workers", type=int, default=0, help="0 = serial")
        p.add_argument("--units", type=str, default=None, choices=("gamma0", "si"))
        p.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
