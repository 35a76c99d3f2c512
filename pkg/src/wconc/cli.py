"""Command-line driver: ``wconc {fig5,fig6,metrics,run,compare}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines (``#`` starts a comment), then command-line flags.
Exit status is 0 on success, 1 on invalid input and 2 when ``compare``
finds a deviation.
"""
from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from . import analysis
from .cavity import IDEAL, CavityParams, InteractionMode
from .ecp.ensemble import ENGINES, PAIRINGS, run_ensemble
from .ecp.states import WParams

EXIT_OK, EXIT_INVALID, EXIT_DEVIATION = 0, 1, 2


class ConfigError(ValueError):
    pass


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _weights(text) -> tuple:
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) != 3:
        raise ConfigError("weights takes three comma-separated numbers")
    return tuple(parts)


# key -> (parser, help); defaults live per subcommand below
OPTIONS = {
    "out": (str, "output path (stdout if omitted)"),
    "seed": (int, "master seed (unsigned 64-bit)"),
    "rounds": (int, "number of protocol rounds"),
    "trajectories": (int, "number of input pairs sampled"),
    "beta_sq_min": (float, "fig5 grid start"),
    "beta_sq_max": (float, "fig5 grid end"),
    "beta_sq_step": (float, "fig5 grid step"),
    "g_min": (float, "fig6 grid start of g/(kappa+kappa_s)"),
    "g_max": (float, "fig6 grid end of g/(kappa+kappa_s)"),
    "g_step": (float, "fig6 grid step of g/(kappa+kappa_s)"),
    "ks_min": (float, "fig6 grid start of kappa_s/kappa"),
    "ks_max": (float, "fig6 grid end of kappa_s/kappa"),
    "ks_step": (float, "fig6 grid step of kappa_s/kappa"),
    "g_ratio": (float, "g/(kappa+kappa_s)"),
    "ks_ratio": (float, "kappa_s/kappa"),
    "qd_gamma": (float, "dipole decay rate in units of kappa"),
    "detuning": (float, "omega - omega_c in units of kappa"),
    "full_complex": (_bool, "use the complex reflection coefficients"),
    "weights": (_weights, "|alpha|^2,|beta|^2,|gamma|^2 (rescaled to sum 1)"),
    "engine": (str, f"ensemble engine, one of {ENGINES}"),
    "pairing": (str, f"two-photon states pooled per even-path pair, one of {PAIRINGS}"),
    "enumerate": (_bool, "expected-value ledger instead of sampling"),
    "lossy": (_bool, "run the gates with the cavity parameters"),
    "triples": (int, "number of random parameter triples"),
}

CAVITY = {"qd_gamma": 0.1, "detuning": 0.5, "full_complex": False}

DEFAULTS: Dict[str, Dict[str, object]] = {
    "fig5": {"out": None, "seed": 0, "rounds": 3, "trajectories": 0,
             "beta_sq_min": analysis.FIG5_GRID[0], "beta_sq_max": analysis.FIG5_GRID[1],
             "beta_sq_step": analysis.FIG5_GRID[2]},
    "fig6": {"out": None, "seed": 0, "rounds": 1, "trajectories": 0,
             "g_min": analysis.FIG6_G_GRID[0], "g_max": analysis.FIG6_G_GRID[1],
             "g_step": analysis.FIG6_G_GRID[2], "ks_min": analysis.FIG6_KS_GRID[0],
             "ks_max": analysis.FIG6_KS_GRID[1], "ks_step": analysis.FIG6_KS_GRID[2], **CAVITY},
    "metrics": {"out": None, "seed": 0, "rounds": 1, "trajectories": 0,
                "g_ratio": 2.4, "ks_ratio": 0.0, **CAVITY},
    "run": {"out": None, "seed": 0, "rounds": 1, "trajectories": 100_000,
            "weights": (1.0, 1.0, 1.0), "engine": "table", "pairing": "one",
            "enumerate": False, "lossy": False, "g_ratio": 2.4, "ks_ratio": 0.0, **CAVITY},
    "compare": {"out": None, "seed": 0, "rounds": 3, "trajectories": 100_000, "triples": 5},
}


def read_config(path: str) -> Dict[str, str]:
    """Flat ``key=value`` pairs; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def resolve(command: str, cli: Dict[str, object]) -> Dict[str, object]:
    """Merge defaults, config file and flags for ``command``."""
    settings = dict(DEFAULTS[command])
    path = cli.pop("config", None)
    if path is not None:
        for key, value in read_config(path).items():
            if key == "mode":
                if value != command:
                    raise ConfigError(f"config is for mode {value!r}, not {command!r}")
                continue
            if key not in settings:
                raise ConfigError(f"unknown key {key!r} for {command}")
            parse = OPTIONS[key][0]
            try:
                settings[key] = parse(value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
    settings.update(cli)
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wconc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig5": "balanced-parameter total success probability for 1..rounds rounds",
        "fig6": "gate fidelity and efficiency over the cavity parameter grid",
        "metrics": "fidelity and efficiency at one cavity operating point",
        "run": "ensemble run with per-round ledger CSV",
        "compare": "closed form vs exact enumeration vs Monte Carlo",
    }
    for name, defaults in DEFAULTS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", default=argparse.SUPPRESS, help="key=value settings file")
        for key in defaults:
            parse, text = OPTIONS[key]
            flag = "--" + key.replace("_", "-")
            if parse is _bool:
                p.add_argument(flag, type=_bool, nargs="?", const=True,
                               default=argparse.SUPPRESS, help=text)
            else:
                p.add_argument(flag, type=parse, default=argparse.SUPPRESS, help=text)
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _cavity(s) -> CavityParams:
    return CavityParams.from_ratios(s["g_ratio"], s["ks_ratio"], s["qd_gamma"], s["detuning"])


def cmd_fig5(s) -> int:
    if not 1 <= s["rounds"] <= 30:
        raise ConfigError("rounds must be in [1, 30]")
    grid = analysis.float_grid(s["beta_sq_min"], s["beta_sq_max"], s["beta_sq_step"])
    rows = analysis.fig5_rows(grid, s["rounds"])
    _emit(analysis.csv_text(analysis.fig5_header(s["rounds"]), rows), s["out"])
    return EXIT_OK


def cmd_fig6(s) -> int:
    g = analysis.float_grid(s["g_min"], s["g_max"], s["g_step"])
    ks = analysis.float_grid(s["ks_min"], s["ks_max"], s["ks_step"])
    rows = analysis.fig6_rows(g, ks, s["qd_gamma"], s["detuning"], s["full_complex"])
    _emit(analysis.csv_text(analysis.FIG6_HEADER, rows), s["out"])
    return EXIT_OK


def cmd_metrics(s) -> int:
    report = analysis.metrics_report(_cavity(s), s["full_complex"])
    sys.stdout.write(report)
    if s["out"] is not None:
        _emit(report, s["out"])
    return EXIT_OK


def cmd_run(s) -> int:
    a2, b2, c2 = s["weights"]
    total = a2 + b2 + c2
    if min(a2, b2, c2) < 0 or total <= 0:
        raise ConfigError("weights must be non-negative with a positive sum")
    w = WParams.from_weights(a2 / total, b2 / total, c2 / total)
    mode = InteractionMode.lossy(_cavity(s), s["full_complex"]) if s["lossy"] else IDEAL
    ledgers = run_ensemble(w, s["trajectories"], s["rounds"], mode, s["seed"],
                           s["pairing"], s["engine"], s["enumerate"])
    _emit(analysis.csv_text(analysis.LEDGER_HEADER, analysis.ledger_rows(ledgers)), s["out"])
    return EXIT_OK


def cmd_compare(s) -> int:
    if s["triples"] < 1:
        raise ConfigError("triples must be >= 1")
    results = analysis.compare_triples(s["triples"], s["seed"], s["rounds"], s["trajectories"])
    sys.stdout.write(analysis.compare_report(results))
    if s["out"] is not None:
        _emit(analysis.csv_text(analysis.COMPARE_HEADER, analysis.compare_rows(results)), s["out"])
    return EXIT_OK if all(c.passed() for c in results) else EXIT_DEVIATION


COMMANDS = {"fig5": cmd_fig5, "fig6": cmd_fig6, "metrics": cmd_metrics,
            "run": cmd_run, "compare": cmd_compare}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    cli = vars(ns)
    command = cli.pop("command")
    try:
        settings = resolve(command, cli)
        if settings["seed"] < 0 or settings["seed"] >= 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return COMMANDS[command](settings)
    except (ValueError, OSError) as exc:
        print(f"wconc {command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
