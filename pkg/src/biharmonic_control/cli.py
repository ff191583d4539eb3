"""Command-line front end.

    biharmonic-control {spectrum,observability,control,scan} --config scenario.json --out prefix

Data files are deterministic (CSV floats use 17 significant digits); run
metadata such as timings goes to ``<prefix>.log`` only.

Exit codes: 0 success, 1 numerical error, 2 invalid scenario, 3 resonant
parameters (control refused, diagnosis written), 4 singular Gram matrix.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels
from .control import diagnose_resonant, null_control
from .errors import BiharmonicError, ConfigError, ResonantParameters, SingularGram
from .evolution import boundary_trace
from .hilbert import CoeffState, project, unit_state
from .observability import (
    gram_matrix,
    invisible_mode,
    observability_bounds,
    observability_constant,
    resonance_scan,
)
from .spectrum import DEFAULT_INT_TOL, enumerate_modes, make_params, resonance_check

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_RESONANT = 3
EXIT_SINGULAR = 4

log = logging.getLogger("biharmonic_control")

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["gamma", "ell", "n_modes"],
    "properties": {
        "gamma": _number,
        "ell": _number,
        "T": {"type": "number", "exclusiveMinimum": 0},
        "n_modes": {"type": "integer", "minimum": 1},
        "initial_data": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "index"],
                    "properties": {"kind": {"const": "mode"}, "index": {"type": "integer", "minimum": 1}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "values"],
                    "properties": {"kind": {"const": "coefficients"}, "values": {"type": "array", "items": _complex}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "values", "grid_size"],
                    "properties": {
                        "kind": {"const": "grid_samples"},
                        "grid_size": {"type": "integer", "minimum": 3},
                        "values": {"type": "array", "items": _complex},
                    },
                },
            ]
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "int_tol": {"type": "number", "minimum": 0},
                "reg": {"type": "number", "minimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"prefix": {"type": "string", "minLength": 1}},
        },
        "gamma_grid": {
            "oneOf": [
                {"type": "array", "items": _number},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "stop", "num"],
                    "properties": {"start": _number, "stop": _number, "num": {"type": "integer", "minimum": 1}},
                },
            ]
        },
        "samples": {"type": "integer", "minimum": 2},
        "verify": {"type": "boolean"},
    },
}


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, data: dict):
    path.write_text(json.dumps(_json_safe(data), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _as_complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


class Scenario:
    """Validated scenario file."""

    def __init__(self, raw: dict):
        try:
            jsonschema.validate(raw, SCENARIO_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"scenario rejected: {exc.message} at {list(exc.absolute_path)}") from None
        self.raw = raw
        try:
            self.params = make_params(raw["gamma"], raw["ell"])
        except BiharmonicError as exc:
            raise ConfigError(str(exc)) from None
        self.T = float(raw.get("T", 1.0))
        self.n_modes = int(raw["n_modes"])
        tol = raw.get("tolerances", {})
        self.int_tol = float(tol.get("int_tol", DEFAULT_INT_TOL))
        self.reg = float(tol.get("reg", 0.0))
        self.prefix = raw.get("outputs", {}).get("prefix")
        self.samples = int(raw.get("samples", 1001))
        self.verify = bool(raw.get("verify", True))

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from None
        return cls(raw)

    def gamma_grid(self) -> list:
        g = self.raw.get("gamma_grid")
        if g is None:
            raise ConfigError("scan requires gamma_grid")
        if isinstance(g, dict):
            grid = np.linspace(g["start"], g["stop"], g["num"]).tolist()
        else:
            grid = [float(v) for v in g]
        if not grid:
            raise ConfigError("gamma_grid is empty")
        if any(not v < 0 for v in grid):
            raise ConfigError("gamma_grid must contain only negative values")
        return grid

    def initial_state(self) -> CoeffState:
        init = self.raw.get("initial_data")
        N = self.n_modes
        if init is None:
            raise ConfigError("initial_data is required for this command")
        kind = init["kind"]
        if kind == "mode":
            if init["index"] > N:
                raise ConfigError(f"mode index {init['index']} exceeds n_modes={N}")
            return unit_state(enumerate_modes(self.params, N, self.int_tol), init["index"])
        if kind == "coefficients":
            vals = [_as_complex(v) for v in init["values"]]
            modes = enumerate_modes(self.params, max(N, len(vals)), self.int_tol)
            c = np.zeros(len(modes), dtype=complex)
            for i, m in enumerate(modes):
                if m.n <= len(vals):
                    c[i] = vals[m.n - 1]
            return CoeffState(modes, c)
        vals = np.array([_as_complex(v) for v in init["values"]])
        if len(vals) != init["grid_size"]:
            raise ConfigError(f"grid_size={init['grid_size']} but {len(vals)} samples given")
        return project(vals, self.params, N, enumerate_modes(self.params, N, self.int_tol))


def _out(prefix, suffix) -> Path:
    p = Path(f"{prefix}{suffix}")
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def cmd_spectrum(sc: Scenario, prefix: str) -> int:
    modes = enumerate_modes(sc.params, sc.n_modes, sc.int_tol)
    write_csv(
        _out(prefix, "_spectrum.csv"),
        ["n", "lambda", "kind", "trace0", "partner"],
        [[m.n, m.lam, m.kind, m.trace0, "" if m.partner is None else m.partner] for m in modes],
    )
    info = resonance_check(sc.params, sc.int_tol)
    write_json(
        _out(prefix, "_resonance.json"),
        {
            "gamma": sc.params.gamma,
            "ell": sc.params.ell,
            "n0": sc.params.n0,
            "spectral_floor": sc.params.floor,
            "s_value": info.s_value,
            "resonant": info.resonant,
            "pairs": [list(p) for p in info.pairs],
            "zero_mode": info.zero_mode,
            "int_tol": sc.int_tol,
        },
    )
    return EXIT_OK


def cmd_observability(sc: Scenario, prefix: str) -> int:
    p, N, T = sc.params, sc.n_modes, sc.T
    modes = enumerate_modes(p, N, sc.int_tol)
    lo, hi = observability_bounds(p, N, T)
    info = resonance_check(p, sc.int_tol)
    result = {
        "gamma": p.gamma,
        "ell": p.ell,
        "T": T,
        "n_modes": N,
        "gram_cond": gram_matrix([m.lam for m in modes], T).cond_proxy,
        "weighted_gram_cond": hi / lo if lo > 0 else math.inf,
        "observability_constant": observability_constant(p, N, T),
        "observability_constant_sturm": observability_constant(p, N, T, method="sturm"),
        "upper_constant": hi,
        "resonant": info.resonant,
        "pairs": [list(q) for q in info.pairs],
        "invisible_modes": [],
    }
    times = np.linspace(0.0, T, sc.samples)
    rows = []
    for pair in info.pairs:
        if pair[1] > N:
            continue
        z = invisible_mode(p, pair, N, sc.int_tol)
        tr = boundary_trace(z, times)
        result["invisible_modes"].append(
            {
                "pair": list(pair),
                "coefficients": [
                    {"n": m.n, "re": c.real, "im": c.imag} for m, c in zip(z.modes, z.coeffs) if c != 0
                ],
                "max_abs_trace": float(np.max(np.abs(tr.values))),
            }
        )
        rows.extend([pair[0], pair[1], t, v.real, v.imag] for t, v in zip(times, tr.values))
    if rows:
        write_csv(_out(prefix, "_invisible_trace.csv"), ["p", "q", "t", "re", "im"], rows)
    write_json(_out(prefix, "_observability.json"), result)
    return EXIT_OK


def _write_state(path, state):
    write_csv(
        path,
        ["n", "lambda", "re", "im", "abs"],
        [[m.n, m.lam, c.real, c.imag, abs(c)] for m, c in zip(state.modes, state.coeffs)],
    )


def cmd_control(sc: Scenario, prefix: str) -> int:
    p = sc.params
    y0 = sc.initial_state()
    try:
        f, report = null_control(p, y0, sc.T, sc.n_modes, sc.reg, sc.int_tol, verify=sc.verify)
        status, code = "success", EXIT_OK
    except ResonantParameters as exc:
        report = diagnose_resonant(p, y0, sc.T, sc.n_modes, sc.int_tol, verify=sc.verify)
        f = report.signal
        status, code = "resonant_refusal", EXIT_RESONANT
        log.info("control refused: %s", exc)
    t, vals = f.sample(sc.samples)
    write_csv(_out(prefix, "_control.csv"), ["t", "re", "im"], [[a, b.real, b.imag] for a, b in zip(t, vals)])
    data = report.to_dict()
    data.update({"status": status, "gamma": p.gamma, "ell": p.ell, "T": sc.T, "n_modes": sc.n_modes})
    write_json(_out(prefix, "_report.json"), data)
    _write_state(_out(prefix, "_final_state.csv"), report.final_state)
    return code


def cmd_scan(sc: Scenario, prefix: str) -> int:
    grid = sc.gamma_grid()
    rows = resonance_scan(grid, sc.params.ell, sc.n_modes, sc.T, sc.int_tol)
    write_csv(
        _out(prefix, "_scan.csv"),
        ["gamma", "observability_constant", "resonant_flag", "status", "nearest_gamma_star", "distance"],
        [[r.gamma, r.constant, int(r.resonant), r.status, r.nearest_critical, r.distance] for r in rows],
    )
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "observability": cmd_observability,
    "control": cmd_control,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biharmonic-control", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", help="output path prefix (overrides outputs.prefix)")
    return ap


def _error(exc, code, prefix):
    payload = {"error": getattr(exc, "code", "error"), "message": str(exc), "exit_code": code}
    if isinstance(exc, SingularGram) and exc.incompatibility is not None:
        payload["incompatibility"] = exc.incompatibility
    print(json.dumps(_json_safe(payload), sort_keys=True))
    if prefix:
        try:
            write_json(_out(prefix, "_error.json"), payload)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    prefix = args.out
    try:
        sc = Scenario.load(args.config)
        prefix = prefix or sc.prefix
        if not prefix:
            raise ConfigError("no output prefix: pass --out or set outputs.prefix")
        handler = logging.FileHandler(_out(prefix, ".log"), mode="w")
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
        try:
            log.info("command=%s config=%s backend=%s", args.command, args.config, kernels.BACKEND)
            t0 = time.perf_counter()
            code = COMMANDS[args.command](sc, prefix)
            log.info("finished with exit code %d in %.3f s", code, time.perf_counter() - t0)
        finally:
            log.removeHandler(handler)
            handler.close()
        return code
    except ConfigError as exc:
        return _error(exc, EXIT_CONFIG, prefix)
    except SingularGram as exc:
        return _error(exc, EXIT_SINGULAR, prefix)
    except BiharmonicError as exc:
        return _error(exc, EXIT_ERROR, prefix)


if __name__ == "__main__":
    sys.exit(main())
