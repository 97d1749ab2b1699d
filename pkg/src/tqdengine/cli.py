"""Command-line front end: single points, 2-D sweeps and named presets.

Exit codes: 0 success, 1 invalid input, 2 some point had a degenerate
stationary state (output is still written, flagged in the status column).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from .analysis import ALIASES, OBSERVABLE_NAMES, InvalidSpec, SweepSpec, classify, sweep
from .dynamics import DegenerateSteadyState, evolve_from_empty, steady_state
from .model import PARAM_NAMES, InvalidParameter, ModelParams, validate
from .observables import compute_observables, prepare
from .presets import PRESETS, UnknownPreset, preset

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2

# CLI / config spelling -> ModelParams field
FLAG_FIELDS = {
    "eps": "eps",
    "delta": "delta",
    "omega": "omega",
    "gamma_left": "gamma_l",
    "gamma_center": "gamma_c",
    "gamma_right": "gamma_r",
    "meas": "meas",
    "mu_left": "mu_l",
    "mu_center": "mu_c",
    "mu_right": "mu_r",
    "t_left": "t_l",
    "t_center": "t_c",
    "t_right": "t_r",
}
CONFIG_KEYS = set(FLAG_FIELDS) | {"sweep", "preset", "out", "format", "outputs", "workers"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tqdengine",
        description="Steady states and thermodynamics of a measurement-monitored triple quantum dot.",
    )
    params = parser.add_argument_group("model parameters (units of k_B T, hbar = e = 1)")
    for flag in FLAG_FIELDS:
        params.add_argument("--" + flag.replace("_", "-"), dest=flag, type=float, default=None, metavar="X")
    parser.add_argument("--sweep", action="append", default=None, metavar="PARAM=MIN:MAX:COUNT",
                        help="sweep axis; give exactly two for a grid")
    parser.add_argument("--outputs", default=None, help="comma-separated output columns for --sweep")
    parser.add_argument("--preset", default=None, metavar="NAME", help=f"one of {', '.join(PRESETS)}")
    parser.add_argument("--out", default=None, help="output file (point/sweep) or directory (preset)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--config", default=None, help="flat JSON file with the same keys as the flags")
    parser.add_argument("--workers", type=int, default=None, help="threads used for grid evaluation")
    return parser


def _normalize_key(key: str) -> str:
    return key.replace("-", "_")


def load_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a flat JSON object")
    data = {_normalize_key(k): v for k, v in data.items()}
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def merged_settings(args: argparse.Namespace) -> dict:
    """Config-file values overridden by explicitly given flags."""
    settings = load_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for key in FLAG_FIELDS:
        if key in settings:
            value = settings[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameter(FLAG_FIELDS[key], f"must be a finite number, got {value!r}")
    return settings


def param_overrides(settings: dict) -> dict:
    return {FLAG_FIELDS[k]: float(settings[k]) for k in FLAG_FIELDS if k in settings}


def parse_axis(text: str) -> tuple:
    try:
        name, rng = text.split("=", 1)
        lo, hi, count = rng.split(":")
        name = _normalize_key(name.strip())
        name = FLAG_FIELDS.get(name, name)
        axis = (name, float(lo), float(hi), int(count))
    except ValueError:
        raise InvalidSpec(f"malformed sweep {text!r}; expected PARAM=MIN:MAX:COUNT") from None
    if axis[0] not in PARAM_NAMES and axis[0] not in ALIASES:
        raise InvalidSpec(f"unknown sweep parameter {axis[0]!r}")
    return axis


def _fmt_csv(value) -> str:
    if isinstance(value, str):
        return value
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def _json_value(value):
    if isinstance(value, str):
        return value
    value = float(value)
    return None if math.isnan(value) else value


def render(records, fmt: str) -> str:
    records = list(records)
    if fmt == "json":
        return json.dumps([{k: _json_value(v) for k, v in r.items()} for r in records]) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(records[0]))
    for r in records:
        writer.writerow([_fmt_csv(v) for v in r.values()])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def cmd_point(settings: dict) -> int:
    params = validate(ModelParams().replace(**param_overrides(settings)))
    params, eig, rates, gen = prepare(params)
    status = "OK"
    try:
        state = steady_state(gen)
    except DegenerateSteadyState:
        status = "DEGENERATE"
        state = evolve_from_empty(gen, params)
    obs = compute_observables(params, eig, rates, state)
    # 12 significant digits for a single point; sweeps keep full precision
    record = {name: float(format(float(getattr(obs, name)), ".12g")) for name in OBSERVABLE_NAMES}
    record["regime"] = "DEGENERATE" if status != "OK" else classify(obs, params.temps).value
    record["status"] = status
    fmt = settings.get("format", "csv")
    if fmt == "json":
        text = json.dumps({k: _json_value(v) for k, v in record.items()}) + "\n"
    else:
        text = render([record], "csv")
    _emit(text, settings.get("out"))
    return EXIT_DEGENERATE if status != "OK" else EXIT_OK


def _spec_outputs(settings: dict):
    if settings.get("outputs") is None:
        return OBSERVABLE_NAMES
    value = settings["outputs"]
    names = value if isinstance(value, list) else [v.strip() for v in str(value).split(",") if v.strip()]
    return tuple(names)


def run_sweep(spec: SweepSpec, workers: int) -> tuple[list, bool]:
    result = sweep(spec, workers=workers)
    return list(result.records()), bool((result.status == "DEGENERATE").any())


def cmd_sweep(settings: dict) -> int:
    axes = settings["sweep"]
    if isinstance(axes, str):
        axes = [axes]
    if len(axes) != 2:
        raise InvalidSpec("a sweep needs exactly two --sweep axes")
    base = ModelParams().replace(**param_overrides(settings))
    spec = SweepSpec(parse_axis(axes[0]), parse_axis(axes[1]), fixed=base, outputs=_spec_outputs(settings))
    spec.check()
    records, degenerate = run_sweep(spec, int(settings.get("workers") or 1))
    _emit(render(records, settings.get("format", "csv")), settings.get("out"))
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def cmd_preset(settings: dict) -> int:
    panels = preset(settings["preset"])
    fmt = settings.get("format", "csv")
    out_dir = settings.get("out") or "."
    overrides = param_overrides(settings)
    workers = int(settings.get("workers") or 1)
    rendered = {}
    degenerate = False
    for panel, spec in panels.items():
        spec = SweepSpec(spec.axis1, spec.axis2, fixed=spec.fixed.replace(**overrides), outputs=spec.outputs)
        records, flagged = run_sweep(spec, workers)
        degenerate |= flagged
        rendered[os.path.join(out_dir, f"{panel}.{fmt}")] = render(records, fmt)
    written = []
    try:
        for path, text in rendered.items():
            write_atomic(path, text)
            written.append(path)
    except BaseException:
        for path in written:
            os.unlink(path)
        raise
    for path in written:
        print(path)
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = merged_settings(args)
        if settings.get("preset") and settings.get("sweep"):
            raise UsageError("--preset and --sweep are mutually exclusive")
        if settings.get("preset"):
            return cmd_preset(settings)
        if settings.get("sweep"):
            return cmd_sweep(settings)
        return cmd_point(settings)
    except InvalidParameter as exc:
        print(f"tqdengine: invalid parameter {exc}", file=sys.stderr)
    except (InvalidSpec, UnknownPreset, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"tqdengine: error: {exc}", file=sys.stderr)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
