"""Reproducible experiment driver.

Usage::

    combnoise <ofd-sweep|dcs-advantage|cyclo-trace|validate>
              [--config <path>] [--out <dir>] [--seed <u64>] [--format csv|json]

Every command is pure given (config, seed): re-running writes byte-identical
outputs.  Each run emits a ``manifest.json`` echoing the fully resolved
config (plus fitted results); re-running from a manifest reproduces the
outputs exactly.  Exit codes: 0 success, 2 usage error, 3 validation
failure, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, _kernels
from ._io import write_json, write_table
from .dcs import STRATEGIES, advantage_curve
from .envelope import SHAPES
from .errors import CombNoiseError, DomainError, NumericError
from .ofd import POLICIES, POLICY_SUPPORT, fit_loglog_slope, sweep_suppression
from .stochastic import si_cyclo_preset, variance_trace
from .validate import run_validation

SCHEMA_VERSION = 1
DEFAULT_SEED = 20260811

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


_DEFAULTS = {
    "ofd-sweep": {
        "shapes": list(SHAPES),
        "m_rms_min": 10.0,
        "m_rms_max": 100.0,
        "n_points": 25,
        "policy": POLICY_SUPPORT,
        "total_flux_per_s": 1.0,
        "uniform_gain": 1.0,
    },
    "dcs-advantage": {
        "g_db": 15.0,
        "ratios": [10, 100],
        "depth_db_min": 0.0,
        "depth_db_max": 30.0,
        "n_points": 61,
        "alpha_ratio_sq": 1e-4,
        "alpha_l": 1.0,
        "strategies": list(STRATEGIES),
    },
    "cyclo-trace": {
        "preset": "si-default",
        "gains": [1.0, 5.0, 10.0],
        "duration_s": 0.02,
        "sample_rate_hz": 1e6,
        "rbw_hz": 100.0,
        "wavelength_m": 1550e-9,
        "power_w": 0.010,
        "n_lines": 101,
        "sigma_lines": None,
        "offset_hz": 10050.0,
        "delta_rep_hz": 100.0,
    },
    "validate": {
        "n_instances": 1000,
        "mc": True,
    },
}

# keys pinned by the named cyclo preset; overriding them alongside the preset
# is a config conflict
_PRESET_PINNED = ("gains", "sample_rate_hz", "rbw_hz", "wavelength_m", "power_w",
                  "n_lines", "sigma_lines", "offset_hz", "delta_rep_hz")


def _load_config(command: str, path: str | None) -> tuple[dict, int | None]:
    """Resolve the config dict and an optional seed carried by the file."""
    merged = dict(_DEFAULTS[command])
    seed = None
    if path is None:
        return merged, seed
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    if "config" in doc and isinstance(doc["config"], dict):
        # manifest round-trip: re-run from an emitted manifest
        if doc.get("command") not in (None, command):
            raise UsageError(f"manifest was produced by {doc.get('command')!r}, "
                             f"not {command!r}")
        seed = doc.get("seed")
        doc = doc["config"]
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise UsageError(f"unsupported config schema_version {version}")
    if doc.get("command") not in (None, command):
        raise UsageError(f"config targets command {doc.get('command')!r}, "
                         f"not {command!r}")
    explicit = set()
    for key, value in doc.items():
        if key in ("schema_version", "command"):
            continue
        if key == "seed":
            seed = value
            continue
        if key not in merged:
            raise UsageError(f"unknown config key {key!r} for {command}")
        merged[key] = value
        explicit.add(key)
    if command == "cyclo-trace" and merged.get("preset") is not None:
        if merged["preset"] != "si-default":
            raise UsageError(f"unknown preset {merged['preset']!r}")
        clash = sorted(explicit.intersection(_PRESET_PINNED))
        if clash:
            raise UsageError("preset 'si-default' pins " + ", ".join(clash)
                             + "; drop the preset to override them")
    return merged, seed


def _manifest(out_dir, command, cfg, seed, outputs, results) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": command,
        "seed": seed,
        "backend": _kernels.BACKEND,
        "config": cfg,
        "outputs": outputs,
        "results": results,
    }
    write_json(os.path.join(out_dir, "manifest.json"), doc)


def _grid(lo: float, hi: float, n: int, log: bool) -> np.ndarray:
    if n < 1:
        raise UsageError("grid needs at least one point")
    if lo > hi:
        raise UsageError("grid minimum exceeds maximum")
    if n == 1:
        return np.array([lo])
    if log:
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def cmd_ofd_sweep(cfg: dict, out_dir: str, seed: int, fmt: str) -> int:
    shapes = cfg["shapes"]
    if not shapes:
        raise UsageError("empty shape list")
    for s in shapes:
        if s not in SHAPES:
            raise UsageError(f"unknown shape {s!r}")
    if cfg["policy"] not in POLICIES:
        raise UsageError(f"unknown policy {cfg['policy']!r}")
    if not (0 < cfg["m_rms_min"] <= cfg["m_rms_max"]):
        raise UsageError("need 0 < m_rms_min <= m_rms_max")
    if cfg["uniform_gain"] < 1.0:
        raise UsageError("uniform_gain must be >= 1")
    targets = _grid(cfg["m_rms_min"], cfg["m_rms_max"], int(cfg["n_points"]), log=True)

    rows = []
    slopes = {}
    for shape in shapes:
        pts = sweep_suppression(shape, targets, cfg["policy"], cfg["uniform_gain"],
                                cfg["total_flux_per_s"])
        for param, m_rms, ratio, eta in pts:
            rows.append((shape, param, m_rms, ratio, eta, cfg["policy"]))
        if len(pts) >= 2:
            slopes[shape] = fit_loglog_slope([p[1] for p in pts], [p[2] for p in pts])
        else:
            slopes[shape] = None

    out = write_table(os.path.join(out_dir, "ofd_sweep"),
                      ("shape", "param", "m_rms", "r", "eta", "policy"), rows, fmt)
    _manifest(out_dir, "ofd-sweep", cfg, seed, [os.path.basename(out)],
              {"slopes": slopes})
    for shape, slope in slopes.items():
        print(f"{shape}: slope {'n/a' if slope is None else f'{slope:+.3f}'}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_dcs_advantage(cfg: dict, out_dir: str, seed: int, fmt: str) -> int:
    if cfg["g_db"] < 0:
        raise UsageError("g_db must be >= 0")
    if not cfg["ratios"]:
        raise UsageError("empty ratio list")
    for r in cfg["ratios"]:
        if int(r) != r or int(r) < 2 or int(r) % 2:
            raise UsageError("ratios are even intact-line counts 2N >= 2")
    for s in cfg["strategies"]:
        if s not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r}")
    if not (0 <= cfg["depth_db_min"] <= cfg["depth_db_max"]):
        raise UsageError("need 0 <= depth_db_min <= depth_db_max")
    if not (cfg["alpha_ratio_sq"] > 0 and cfg["alpha_l"] > 0):
        raise UsageError("alpha_ratio_sq and alpha_l must be positive")

    gain = 10.0 ** (cfg["g_db"] / 10.0)
    alpha_l = float(cfg["alpha_l"])
    alpha_s = alpha_l * math.sqrt(cfg["alpha_ratio_sq"])
    depths = _grid(cfg["depth_db_min"], cfg["depth_db_max"], int(cfg["n_points"]),
                   log=False)
    rows = []
    endpoints = {}
    for ratio in cfg["ratios"]:
        n_pairs = int(ratio) // 2
        for strategy in cfg["strategies"]:
            pts = advantage_curve(n_pairs, depths, gain, alpha_s, alpha_l, strategy)
            for p in pts:
                rows.append((p["depth_db"], p["strategy"], p["ratio"],
                             p["g_db"], p["advantage_db"]))
            endpoints[f"{strategy}-ratio{int(ratio)}"] = {
                "depth0_db": pts[0]["advantage_db"],
                "depth_max_db": pts[-1]["advantage_db"],
            }
    out = write_table(os.path.join(out_dir, "dcs_advantage"),
                      ("depth_db", "strategy", "ratio", "g_db", "advantage_db"),
                      rows, fmt)
    _manifest(out_dir, "dcs-advantage", cfg, seed, [os.path.basename(out)],
              {"endpoints": endpoints})
    print(f"wrote {out}")
    return EXIT_OK


def cmd_cyclo_trace(cfg: dict, out_dir: str, seed: int, fmt: str) -> int:
    gains = [float(g) for g in cfg["gains"]]
    if not gains:
        raise UsageError("empty gain list")
    try:
        pre = si_cyclo_preset(
            gains=gains, sample_rate_hz=float(cfg["sample_rate_hz"]),
            duration_s=float(cfg["duration_s"]), rbw_hz=float(cfg["rbw_hz"]),
            seed=seed, power_w=float(cfg["power_w"]),
            wavelength_m=float(cfg["wavelength_m"]), n_lines=int(cfg["n_lines"]),
            sigma_lines=cfg["sigma_lines"], offset_hz=float(cfg["offset_hz"]),
            delta_rep_hz=float(cfg["delta_rep_hz"]))
    except DomainError as exc:
        raise UsageError(str(exc)) from exc

    times = pre.cfg.times()
    outputs = []
    results = {}
    for g in gains:
        trace = variance_trace(pre.setup, pre.specs[g], pre.sample, times,
                               lo_spec=None)
        norm = trace.normalized
        mean_peak = float(np.max(np.abs(trace.mean)))
        mean_norm = trace.mean / mean_peak
        rows = list(zip(times * 1e6, mean_norm, norm))
        tag = f"{g:g}".replace(".", "p")
        out = write_table(os.path.join(out_dir, f"cyclo_trace_g{tag}"),
                          ("t_us", "mean_i", "var_i"), rows, fmt)
        outputs.append(os.path.basename(out))
        results[f"g{tag}"] = {
            "gain": g,
            "var_norm_min": float(np.min(norm)),
            "var_norm_max": float(np.max(norm)),
            "var_norm_avg": float(np.mean(norm)),
            "sql_raw": trace.sql,
            "mean_peak_raw": mean_peak,
        }
        print(f"G={g:g}: normalized variance in [{np.min(norm):.6g}, {np.max(norm):.6g}]")
    _manifest(out_dir, "cyclo-trace", cfg, seed, outputs, results)
    print(f"wrote {len(outputs)} trace files to {out_dir}")
    return EXIT_OK


def cmd_validate(cfg: dict, out_dir: str, seed: int, fmt: str) -> int:
    n = int(cfg["n_instances"])
    if n < 1:
        raise UsageError("n_instances must be >= 1")
    report = run_validation(n_instances=n, seed=seed, mc=bool(cfg["mc"]))
    out = write_json(os.path.join(out_dir, "validation_report.json"), report)
    _manifest(out_dir, "validate", cfg, seed, [os.path.basename(out)],
              {"all_passed": report["all_passed"]})
    for check in report["checks"]:
        print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}: {check['detail']}")
    print(f"wrote {out}")
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


_HANDLERS = {
    "ofd-sweep": cmd_ofd_sweep,
    "dcs-advantage": cmd_dcs_advantage,
    "cyclo-trace": cmd_cyclo_trace,
    "validate": cmd_validate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combnoise",
        description="Quantum noise floors of frequency-comb measurements")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("ofd-sweep", "suppression-ratio sweep over RMS modal bandwidth"),
            ("dcs-advantage", "SNR advantage vs single-line absorption depth"),
            ("cyclo-trace", "cyclostationary variance traces (named preset)"),
            ("validate", "oracle-equivalence / reduction / MC suites")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config (or a previously emitted manifest)")
        p.add_argument("--out", default="combnoise-out", help="output directory")
        p.add_argument("--seed", type=int, help="64-bit RNG seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg, cfg_seed = _load_config(args.command, args.config)
        seed = args.seed if args.seed is not None else \
            (cfg_seed if cfg_seed is not None else DEFAULT_SEED)
        if not 0 <= seed < 2 ** 64:
            raise UsageError("seed must fit in 64 bits")
        return _HANDLERS[args.command](cfg, args.out, int(seed), args.format)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CombNoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
