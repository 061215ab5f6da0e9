"""Command-line front end.

Usage::

    covert-timing COMMAND [--config FILE] [flags]

Commands are ``detect``, ``decode``, ``roc``, ``sweep``, ``bounds`` and
``verify``. A config file holds one ``key = value`` pair per line; ``#``
starts a comment. Flags override file values. Keys:

    n, T, schedule, scheme, slot_known, trials, seed, c_P, gamma,
    sigma_w_sq, sigma_b_sq, out, format, n_list, workers, detector

Every output starts with the resolved configuration (``# key=value`` lines
in CSV, a ``config`` object in JSON). ``out`` and ``workers`` are left out
of that header because they do not affect results.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bd
from .channel import Frame
from .detection import Hypothesis, log_lrt_binary, log_lrt_binary_brute, maxpower_delta
from .harness import (SWEEP_COLUMNS, csv_text, estimate_decoding_error, estimate_detection_error,
                      estimate_roc, format_value, json_text, scaling_sweep, summary_row)
from .model import (DomainError, ParameterError, ScenarioParams, Scheme, TScheduleSpec,
                    power_budget, schedule_T, throughput_bits)

COMMANDS = ("detect", "decode", "roc", "sweep", "bounds", "verify")

DEFAULTS = dict(c_P=0.5, gamma=0.5, trials=10_000, sigma_w_sq=1.0, sigma_b_sq=1.0,
                scheme="gaussian", slot_known=False, format="csv", workers=1, detector="lrt")

# config key -> (flag, type)
_KEYS = {
    "command": (None, str),
    "n": ("--n", int),
    "T": ("--T", int),
    "schedule": ("--schedule", str),
    "scheme": ("--scheme", str),
    "slot_known": ("--slot-known", str),
    "trials": ("--trials", int),
    "seed": ("--seed", int),
    "c_P": ("--c-p", float),
    "gamma": ("--gamma", float),
    "sigma_w_sq": ("--sigma-w-sq", float),
    "sigma_b_sq": ("--sigma-b-sq", float),
    "out": ("--out", str),
    "format": ("--format", str),
    "n_list": ("--n-list", str),
    "workers": ("--workers", int),
    "detector": ("--detector", str),
}


class ConfigError(ValueError):
    """Bad command-line or config-file input; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    scenario: ScenarioParams | None = None
    schedule: TScheduleSpec | None = None
    trials: int = 10_000
    output_path: str | None = None
    format: str = "csv"
    n_list: tuple[int, ...] = ()
    workers: int = 1
    detector: str = "lrt"
    resolved: dict = field(default_factory=dict, compare=False)


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments, blank lines ignored)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        values[key] = value
    return values


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covert-timing", description=__doc__.split("\n\n")[0],
                                 argument_default=argparse.SUPPRESS)
    ap.add_argument("command", nargs="?", help="one of " + ", ".join(COMMANDS))
    ap.add_argument("--config", help="key = value config file")
    for key, (flag, _) in _KEYS.items():
        if flag:
            ap.add_argument(flag, dest=key)
    return ap


def _convert(key: str, value):
    kind = _KEYS[key][1]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot read {value!r} as {kind.__name__}") from None


def _parse_bool(key, value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ConfigError(key, f"expected true or false, got {value!r}")


def parse_config(argv=None, text: str | None = None) -> RunConfig:
    """Resolve defaults, config-file values and flags (in rising priority).

    Parameters
    ----------
    argv : list of str, optional
        Command-line arguments (without the program name).
    text : str, optional
        Config file contents; used in addition to any ``--config`` file.
    """
    ns = vars(_build_parser().parse_args([] if argv is None else list(argv)))
    raw = dict(DEFAULTS)
    if text is not None:
        raw.update(parse_config_text(text))
    if "config" in ns:
        try:
            with open(ns.pop("config")) as fh:
                raw.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    raw.update({k: v for k, v in ns.items() if v is not None})
    return _validate(raw)


def _validate(raw: dict) -> RunConfig:
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {', '.join(COMMANDS)}, got {command!r}")
    if raw.get("seed") is None:
        raise ConfigError("seed", "a seed is required")
    seed = _convert("seed", raw["seed"])
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    cfg = {k: (_convert(k, v) if k in _KEYS and k != "slot_known" else v) for k, v in raw.items()}
    cfg["seed"] = seed
    cfg["slot_known"] = _parse_bool("slot_known", raw["slot_known"])

    for key, lo, hi in (("c_P", 0, 1), ("gamma", 0, 1)):
        if not lo < cfg[key] < hi:
            raise ConfigError(key, f"must lie in ({lo}, {hi}), got {cfg[key]}")
    for key in ("sigma_w_sq", "sigma_b_sq"):
        if not cfg[key] > 0:
            raise ConfigError(key, f"must be positive, got {cfg[key]}")
    if cfg["trials"] < 1:
        raise ConfigError("trials", f"must be positive, got {cfg['trials']}")
    if cfg["workers"] < 1:
        raise ConfigError("workers", f"must be positive, got {cfg['workers']}")
    if cfg["scheme"] not in ("gaussian", "binary"):
        raise ConfigError("scheme", f"expected gaussian or binary, got {cfg['scheme']!r}")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format", f"expected csv or json, got {cfg['format']!r}")
    if cfg["detector"] not in ("lrt", "maxpower"):
        raise ConfigError("detector", f"expected lrt or maxpower, got {cfg['detector']!r}")

    schedule = None
    if "schedule" in cfg:
        try:
            schedule = TScheduleSpec.parse(cfg["schedule"])
        except ParameterError as exc:
            raise ConfigError("schedule", str(exc)) from None
        cfg["schedule"] = str(schedule)

    n_list: tuple[int, ...] = ()
    if "n_list" in cfg:
        try:
            n_list = tuple(int(x) for x in str(cfg["n_list"]).split(",") if x.strip())
        except ValueError:
            raise ConfigError("n_list", f"expected comma-separated integers, got {cfg['n_list']!r}") from None
        if not n_list or list(n_list) != sorted(n_list) or n_list[0] < 1:
            raise ConfigError("n_list", "must be a non-empty ascending list of positive integers")
        cfg["n_list"] = ",".join(map(str, n_list))

    scenario = None
    if command == "sweep":
        if schedule is None:
            raise ConfigError("schedule", "sweep needs a schedule")
        if not n_list:
            raise ConfigError("n_list", "sweep needs n_list")
        # template only: n and T are set per row
        scenario = _scenario(cfg, 1, 1)
    elif command != "verify":
        if "n" not in cfg:
            raise ConfigError("n", f"{command} needs n")
        if cfg["n"] < 1:
            raise ConfigError("n", f"must be a positive integer, got {cfg['n']}")
        if "T" not in cfg:
            if schedule is None:
                raise ConfigError("T", f"{command} needs T or a schedule")
            try:
                cfg["T"] = schedule_T(schedule, cfg["n"])
            except OverflowError as exc:
                raise ConfigError("schedule", str(exc)) from None
        if cfg["T"] < 1:
            raise ConfigError("T", f"must be a positive integer, got {cfg['T']}")
        scenario = _scenario(cfg, cfg["n"], cfg["T"])

    resolved = {k: cfg[k] for k in _KEYS if k in cfg and k not in ("out", "workers")}
    return RunConfig(command, seed, scenario, schedule, cfg["trials"], cfg.get("out"),
                     cfg["format"], n_list, cfg["workers"], cfg["detector"], resolved)


def _scenario(cfg, n, T) -> ScenarioParams:
    return ScenarioParams(n, T, cfg["sigma_w_sq"], cfg["sigma_b_sq"], cfg["c_P"], cfg["gamma"],
                          Scheme(cfg["scheme"]), cfg["slot_known"])


# --------------------------------------------------------------------- run

def _bound_rows(p: ScenarioParams) -> list[dict]:
    budget = power_budget(p)
    power = budget.symbol_power
    M = throughput_bits(p, budget)
    rows = []

    def add(name, fn, **inputs):
        try:
            b = fn()
            value, vacuous, note = b.value, b.vacuous, ""
        except (DomainError, ParameterError) as exc:
            value, vacuous, note = math.nan, True, str(exc)
        rows.append(dict(bound=name, value=value, vacuous=vacuous,
                         inputs=" ".join(f"{k}={format_value(v)}" for k, v in inputs.items()),
                         note=note))

    delta = maxpower_delta(p.T, 0.05)
    add("chernoff_chi2_tail", lambda: bd.chernoff_chi2_tail(p.n, delta), delta=delta)
    for hyp in Hypothesis:
        add(f"chebyshev_slot_term_{hyp.name.lower()}",
            lambda h=hyp: bd.chebyshev_slot_term_bound(p.scheme, h, p.n, p.T, p.sigma_w_sq, power, 1.0),
            power=power, delta=1.0)
    add("decoding", lambda: bd.decoding_bound(p.scheme, p.slot_known_to_bob, M, p.n, p.T, power,
                                              p.sigma_b_sq), M=M, power=power)
    converse_power = 8 * p.sigma_w_sq * math.sqrt(math.log(p.T) / p.n)
    add("converse_md", lambda: bd.converse_md_bound(p.n, p.T, p.sigma_w_sq, converse_power, delta),
        P_f=converse_power, delta=delta)
    return rows


def verify_checks(seed: int) -> list[dict]:
    """Oracle and identity checks; each row has ``check``, ``passed`` and ``max_error``."""
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for n in range(1, 11):
        for _ in range(20):
            T = int(rng.integers(1, 6))
            frame = Frame(rng.normal(0, 1, n * T), n, T)
            a, s2 = float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.5, 2.0))
            x = log_lrt_binary(frame, s2, a).log_lambda
            y = log_lrt_binary_brute(frame, s2, a).log_lambda
            worst = max(worst, abs(x - y) / max(abs(y), 1e-300) if y else abs(x - y))
    rows.append(dict(check="binary_lrt_brute_vs_factorized", passed=worst <= 1e-9, max_error=worst))
    worst = 0.0
    for a in (0.0, 0.01, 0.3, 1.0, 2.5, 5.0):
        for n in range(1, 13):
            ref = bd.cosh_identity_brute(a, n)
            worst = max(worst, abs(bd.cosh_identity(a, n) - ref) / ref)
    rows.append(dict(check="cosh_identity", passed=worst <= 1e-12, max_error=worst))
    x = np.linspace(0.0, 12.0, 1201)
    gap = float(np.max(bd.q_function(x) - bd.q_upper(x)))
    rows.append(dict(check="q_bound_grid", passed=gap <= 0.0, max_error=max(gap, 0.0)))
    return rows


def _write(rows, cfg: RunConfig, columns=None):
    if cfg.format == "json":
        text = json_text(rows, cfg.resolved)
    else:
        text = csv_text(rows, cfg.resolved, columns)
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", newline="\n") as fh:
            fh.write(text)


def run(config: RunConfig) -> int:
    """Execute one command. Returns 0 on success, 1 on a failed verification,
    2 on bad parameters or an I/O error."""
    c, p = config, config.scenario
    try:
        if c.command == "detect":
            s = estimate_detection_error(p, c.detector, c.trials, c.seed, workers=c.workers)
            rows = [summary_row(s)]
        elif c.command == "decode":
            s = estimate_decoding_error(p, c.trials, c.seed, workers=c.workers)
            rows = [summary_row(s)]
        elif c.command == "roc":
            curve = estimate_roc(p, c.detector, c.trials, c.seed, workers=c.workers)
            rows = [dict(p_fa=float(x), p_detect=float(y)) for x, y in curve.points]
        elif c.command == "sweep":
            rows = scaling_sweep(c.schedule, c.n_list, p, c.trials, c.seed, workers=c.workers)
            _write(rows, c, SWEEP_COLUMNS)
            return 0
        elif c.command == "bounds":
            rows = _bound_rows(p)
        else:
            rows = verify_checks(c.seed)
            for r in rows:
                print(f"{'PASS' if r['passed'] else 'FAIL'} {r['check']} (max error {r['max_error']:.3g})",
                      file=sys.stderr)
            if c.output_path is not None:
                _write(rows, c)
            return 0 if all(r["passed"] for r in rows) else 1
        _write(rows, c)
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
