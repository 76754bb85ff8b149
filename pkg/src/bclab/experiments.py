"""Experiment configs, runners and the manifest/CSV writers behind the CLI.

A config is ``{"version": 1, "command": name, "params": {...}}``. Parsing
fills defaults, rejects unknown keys and type-checks every value; each
runner then checks the owning module's preconditions before any heavy
computation starts.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__, kernels
from .errors import ConfigError, LabError
from .observables import Observable

CONFIG_VERSION = 1
OUT_ENV = "BCLAB_OUT"

X2 = [{"type": "polynomial", "params": {"coefficients": [0.0, 0.0, 1.0]}}]
BUMP = [{"type": "plateau-bump", "params": {"lo": -0.5, "hi": 0.5, "rho": 0.5}}]

# five C^2 composites for the linear-response check against finite differences
FD_OBSERVABLES = {
    "bump+cubic": [{"type": "plateau-bump", "params": {"lo": -0.5, "hi": 0.8, "rho": 0.3}},
                   {"type": "polynomial", "params": {"coefficients": [0.0, 0.2, 0.0, 0.1]}}],
    "quartic": [{"type": "polynomial", "params": {"coefficients": [1.0, -0.5, 0.3, 0.0, 0.05]}}],
    "bump-difference": [{"type": "plateau-bump", "params": {"lo": -1.0, "hi": 1.0, "rho": 0.5}},
                        {"type": "plateau-bump", "params": {"lo": 0.2, "hi": 0.6, "rho": 0.1, "scale": -0.5}}],
    "x2+wide-bump": [{"type": "polynomial", "params": {"coefficients": [0.0, 0.0, 1.0]}},
                     {"type": "plateau-bump", "params": {"lo": -2.0, "hi": 0.5, "rho": 0.7, "scale": 2.0}}],
    "bump-train": [{"type": "plateau-bump", "params": {"lo": -1.5, "hi": -0.9, "rho": 0.2}},
                   {"type": "plateau-bump", "params": {"lo": -0.1, "hi": 0.3, "rho": 0.15, "scale": 1.5}},
                   {"type": "plateau-bump", "params": {"lo": 0.9, "hi": 2.0, "rho": 0.4, "scale": -0.7}}],
}


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class P:
    """One parameter: default value and kind."""

    default: object
    kind: str  # float, int, bool, str, floats, ints, strs, observable, observables, section
    nullable: bool = False
    choices: tuple = ()
    sub: dict | None = None


BOUNDS_AUDITS = ("convolution", "derivative-bound", "small-union", "azuma", "berry-esseen")

SCHEMAS = {
    "fourier-scan": {
        "lam": P(0.5, "float"),
        "xi_min": P(-100.0, "float"),
        "xi_max": P(100.0, "float"),
        "xi_step": P(0.1, "float"),
        "depth": P(60, "int"),
        "derivative": P(False, "bool"),
        "oracle_tol": P(1e-10, "float"),
    },
    "sobolev": {
        "gamma": P(0.05, "float"),
        "lambda_min": P(0.51, "float"),
        "lambda_max": P(0.707, "float"),
        "xi_cutoff": P(1e4, "float"),
        "step": P(0.01, "float"),
        "nodes": P(64, "int"),
        "depth": P(None, "int", nullable=True),
        "max_refinement_ratio": P(1.05, "float"),
    },
    "rho-check": {
        "a": P(0.85, "float"),
        "b": P(0.9, "float"),
        "observable": P(BUMP, "observable"),
        "xi_cutoff": P(1e4, "float"),
        "nodes": P(64, "int"),
        "h_depth": P(22, "int"),
        "seed": P(0, "int"),
        "tol": P(1e-3, "float"),
        "decay_alpha": P(2.0, "float"),
        "decay_xi_max": P(1e4, "float"),
    },
    "response-curve": {
        "observables": P({"x2": X2}, "observables"),
        "lambda_min": P(0.05, "float"),
        "lambda_max": P(0.6, "float"),
        "n_lambda": P(20, "int"),
        "order": P(2, "int"),
        "depth": P(22, "int"),
        "mode": P("exact", "str", choices=("exact", "mc")),
        "n_samples": P(1 << 20, "int"),
        "seed": P(0, "int"),
        "fd_step": P(None, "float", nullable=True),
        "fd_tol": P(1e-4, "float"),
        "reference": P(None, "str", nullable=True, choices=("second-moment",)),
        "ref_rel_h_prime": P(1e-6, "float"),
        "ref_rel_h_second": P(1e-3, "float"),
    },
    "diff-scan": {
        "lambda0": P(0.35, "float"),
        "theta": P(0.5, "float"),
        "n_max": P(4, "int"),
        "depth": P(22, "int"),
        "eps": P(None, "floats", nullable=True),
        "min_ratio": P(4.0, "float"),
        "identity_tol": P(1e-10, "float"),
    },
    "dimension-drop": {
        "lambda0": P(0.35, "float"),
        "theta": P(0.5, "float"),
        "n_max": P(4, "int"),
        "depth": P(22, "int"),
        "window_samples": P(50, "int"),
        "holder_grid": P(1 << 16, "int"),
    },
    "adapted-pair": {
        "delta": P(0.1, "float"),
        "alpha": P(0.5, "float"),
        "theta1": P(None, "float", nullable=True),
        "theta2": P(None, "float", nullable=True),
        "beta": P(None, "float", nullable=True),
        "k_max": P(3, "int"),
        "lam": P(0.25, "float"),
        "n_seeds": P(200, "int"),
        "seed": P(0, "int"),
        "depth": P(20, "int"),
        "empirical_max_N": P(1 << 12, "int"),
        "demo_k_max": P(3, "int"),
        "identity_tol": P(1e-10, "float"),
    },
    "gbm-audit": {
        "delta": P(0.1, "float"),
        "alpha": P(0.5, "float"),
        "theta1": P(None, "float", nullable=True),
        "theta2": P(None, "float", nullable=True),
        "beta": P(None, "float", nullable=True),
        "N": P(1 << 10, "int"),
        "lam": P(0.25, "float"),
        "n_seeds": P(200, "int"),
        "seed": P(0, "int"),
        "depth": P(20, "int"),
        "holder_grid": P(1 << 14, "int"),
        "holder_freq_min": P(0.9, "float"),
        "slope_exponents": P([8, 9, 10, 11, 12], "ints"),
        "slope_tol": P(0.2, "float"),
        "sup_N": P(1 << 12, "int"),
        "sup_trials": P(2000, "int"),
    },
    "bounds-audit": {
        "audits": P(list(BOUNDS_AUDITS), "strs", choices=BOUNDS_AUDITS),
        "seed": P(0, "int"),
        "convolution": P(None, "section", sub={
            "lambda_min": P(0.05, "float"),
            "lambda_max": P(0.95, "float"),
            "n_lambda": P(100, "int"),
            "xi_min": P(0.1, "float"),
            "xi_max": P(100.0, "float"),
            "n_xi": P(10, "int"),
            "m_values": P([1, 2, 3, 4, 5], "ints"),
            "depth": P(200, "int"),
            "tol": P(1e-10, "float"),
        }),
        "derivative-bound": P(None, "section", sub={
            "n_cases": P(10000, "int"),
            "lambda_min": P(0.55, "float"),
            "lambda_max": P(0.95, "float"),
            "xi_max": P(200.0, "float"),
            "n_max": P(31, "int"),
            "depth": P(96, "int"),
        }),
        "small-union": P(None, "section", sub={
            "n_cases": P(1000, "int"),
            "delta": P(0.1, "float"),
            "lam": P(0.35, "float"),
            "max_level": P(8, "int"),
        }),
        "azuma": P(None, "section", sub={
            "n_steps": P(100, "int"),
            "threshold": P(30.0, "float"),
            "n_trials": P(10 ** 6, "int"),
        }),
        "berry-esseen": P(None, "section", sub={
            "n_summands": P(100, "int"),
            "n_intervals": P(1000, "int"),
            "n_trials": P(10 ** 6, "int"),
            "c": P(1.0, "float"),
        }),
    },
}

COMMANDS = tuple(SCHEMAS) + ("report",)

PRESETS = {
    "c1": ("fourier-scan", {}, "closed-form transform at lambda = 1/2"),
    "c2": ("bounds-audit", {"audits": ["convolution"]}, "convolution identity on a 100 x 10 x 5 grid"),
    "c3": ("bounds-audit", {"audits": ["derivative-bound"]}, "cosine-product derivative bound, 10^4 cases"),
    "c4": ("response-curve", {"reference": "second-moment"}, "moments of x^2 against closed forms"),
    "c5": ("response-curve", {"observables": FD_OBSERVABLES, "lambda_min": 0.1, "lambda_max": 0.9,
                              "order": 1, "depth": 20, "fd_step": 1e-4},
           "h' against central differences for five C^2 observables"),
    "c6": ("rho-check", {}, "density integral against h(b) - h(a) for a C^2 bump"),
    "c7": ("sobolev", {}, "Sobolev integral refinement from cutoff 5e3 to 1e4"),
    "c8": ("dimension-drop", {}, "layer norms, Hoelder moduli and derivative floor"),
    "c9": ("diff-scan", {}, "difference quotients along the cover-length ladder"),
    "c10": ("gbm-audit", {}, "random-function Hoelder frequency and derivative statistics"),
    "c11": ("adapted-pair", {}, "adapted pair build, verification and S+T+R scan"),
    "c12": ("bounds-audit", {"audits": ["azuma", "berry-esseen"]}, "Azuma and Berry-Esseen audits"),
    "c13": ("bounds-audit", {"audits": ["small-union"]}, "small-union bound on 1000 seeded cases"),
}


def _fill(schema, params, where):
    if not isinstance(params, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    out = {}
    for key, spec in schema.items():
        name = f"{where}.{key}"
        if spec.kind == "section":
            out[key] = _fill(spec.sub, params.get(key) or {}, name)
            continue
        val = params.get(key, spec.default)
        out[key] = _coerce(val, spec, name)
    return out


def _coerce(val, spec, name):
    if val is None:
        if spec.nullable:
            return None
        raise ConfigError(f"{name} may not be null")
    k = spec.kind
    if k == "float":
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{name} must be a number")
        val = float(val)
        if not math.isfinite(val):
            raise ConfigError(f"{name} must be finite")
    elif k == "int":
        if isinstance(val, bool) or not isinstance(val, int):
            if isinstance(val, float) and val.is_integer():
                val = int(val)
            else:
                raise ConfigError(f"{name} must be an integer")
    elif k == "bool":
        if not isinstance(val, bool):
            raise ConfigError(f"{name} must be true or false")
    elif k == "str":
        if not isinstance(val, str):
            raise ConfigError(f"{name} must be a string")
    elif k in ("floats", "ints", "strs"):
        if not isinstance(val, (list, tuple)):
            raise ConfigError(f"{name} must be a list")
        inner = P(None, k[:-1], choices=spec.choices)
        val = [_coerce(v, inner, f"{name}[{i}]") for i, v in enumerate(val)]
        return val
    elif k == "observable":
        _observable(val, name)
        val = json.loads(json.dumps(val))
    elif k == "observables":
        if not isinstance(val, dict) or not val:
            raise ConfigError(f"{name} must be a non-empty object of name -> observable")
        for label, obs in val.items():
            _observable(obs, f"{name}.{label}")
        val = json.loads(json.dumps(val))
    if spec.choices and k in ("str", "int") and val not in spec.choices:
        raise ConfigError(f"{name} must be one of {list(spec.choices)}")
    return val


def _observable(data, name):
    try:
        return Observable.from_json(data)
    except (LabError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict
    version: int = CONFIG_VERSION

    def to_dict(self):
        return {"version": self.version, "command": self.command, "params": self.params}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def canonical(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    @classmethod
    def parse(cls, data):
        """Build a config from a dict or JSON text; defaults are filled in."""
        if isinstance(data, (str, bytes)):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - {"version", "command", "params"})
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
        version = data.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version!r}")
        command = data.get("command")
        if command not in SCHEMAS:
            raise ConfigError(f"unknown command {command!r}; expected one of {sorted(SCHEMAS)}")
        params = _fill(SCHEMAS[command], data.get("params") or {}, "params")
        return cls(command, params, version)

    @classmethod
    def default(cls, command):
        return cls.parse({"command": command})

    @classmethod
    def preset(cls, name):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; have {', '.join(PRESETS)}")
        command, params, _ = PRESETS[name]
        return cls.parse({"command": command, "params": params})

    def with_overrides(self, overrides):
        """Apply dotted ``key=value`` overrides and re-validate."""
        params = json.loads(json.dumps(self.params))
        for key, value in overrides.items():
            node = params
            parts = key.split(".")
            for p in parts[:-1]:
                if not isinstance(node.get(p), dict):
                    raise ConfigError(f"unknown key {key!r}")
                node = node[p]
            node[parts[-1]] = value
        return ExperimentConfig.parse({"version": self.version, "command": self.command, "params": params})


# ---------------------------------------------------------------------------
# results and output
# ---------------------------------------------------------------------------

@dataclass
class Table:
    name: str
    columns: tuple
    rows: list


@dataclass
class RunResult:
    tables: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def audit(self, name, passed, value=None, bound=None, **detail):
        self.audits.append({"name": name, "passed": bool(passed), "value": _jsonable(value),
                            "bound": _jsonable(bound), "detail": _jsonable(detail)})

    def table(self, name, columns, rows):
        self.tables.append(Table(name, tuple(columns), rows))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 17)
    return v


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows):
    """RFC-4180 CSV with repr floats, so reruns are byte-identical."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in columns])


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions():
    return {"bclab": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "mpmath": mpmath.__version__}


def default_out_dir(label):
    return Path(os.environ.get(OUT_ENV) or "bclab-out") / label


def run(config: ExperimentConfig, out_dir, workers=1, label=None):
    """Execute ``config``, write its CSV tables and ``manifest.json`` into ``out_dir``.

    Returns the manifest dict. Library errors propagate to the caller.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    workers = max(1, int(workers))
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    result = RUNNERS[config.command](config.params, workers)
    wall = time.perf_counter() - t0
    outputs = []
    for t in result.tables:
        path = out / f"{t.name}.csv"
        write_csv(path, t.columns, t.rows)
        outputs.append({"path": path.name, "rows": len(t.rows), "sha256": _sha256(path)})
    manifest = {
        "label": label or config.command,
        "command": config.command,
        "config": config.to_dict(),
        "config_hash": config.hash,
        "versions": versions(),
        "backend": kernels.backend(),
        "seed": config.params.get("seed"),
        "workers": workers,
        "started_utc": started.isoformat(timespec="seconds"),
        "wall_time_s": round(wall, 3),
        "outputs": outputs,
        "audits": result.audits,
        "passed": all(a["passed"] for a in result.audits),
        "summary": _jsonable(result.summary),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _pmap(fn, items, workers):
    """Ordered map; a process pool when workers > 1. Results do not depend on workers."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def _check(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _validated(fn, *args, **kwargs):
    """Call a cheap module-side validator, turning its errors into config errors."""
    try:
        return fn(*args, **kwargs)
    except LabError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def run_fourier_scan(p, workers):
    from .fourier import mu_hat_array, mu_hat_dlambda_array
    from .symbolic import check_lambda

    lam = _validated(check_lambda, p["lam"])
    _check(p["xi_step"] > 0 and p["xi_max"] >= p["xi_min"], "need xi_step > 0 and xi_max >= xi_min")
    _check(p["depth"] >= 2, "depth must be >= 2")
    n = int(round((p["xi_max"] - p["xi_min"]) / p["xi_step"]))
    _check(n + 1 <= 10 ** 7, "xi grid larger than 10^7 points")
    xi = p["xi_min"] + p["xi_step"] * np.arange(n + 1)
    vals, err = mu_hat_array(lam, xi, p["depth"])
    cols = ["xi", "mu_hat", "truncation_error"]
    rows = [{"xi": x, "mu_hat": v, "truncation_error": e} for x, v, e in zip(xi, vals, err)]
    res = RunResult()
    if p["derivative"]:
        _, der, derr = mu_hat_dlambda_array(lam, xi, p["depth"])
        cols += ["dmu_hat_dlambda", "dlambda_truncation_error"]
        for r, d, e in zip(rows, der, derr):
            r["dmu_hat_dlambda"], r["dlambda_truncation_error"] = d, e
    if lam == 0.5:
        # mu_hat_{1/2}(xi) = prod cos(xi / 2^n) = sin(2 xi) / (2 xi)
        ref = np.sinc(2.0 * xi / np.pi)
        diff = np.abs(vals - ref)
        cols += ["closed_form", "abs_error"]
        for r, c, d in zip(rows, ref, diff):
            r["closed_form"], r["abs_error"] = c, d
        worst = float(diff.max())
        res.audit("closed-form-oracle", worst < p["oracle_tol"], worst, p["oracle_tol"],
                  xi_at_max=float(xi[int(diff.argmax())]))
    res.table("fourier_scan", cols, rows)
    res.summary = {"points": int(xi.size), "max_truncation_error": float(np.max(err))}
    return res


def run_sobolev(p, workers):
    from .fourier import sobolev_integral
    from .symbolic import check_lambda

    _validated(check_lambda, p["lambda_min"])
    _validated(check_lambda, p["lambda_max"])
    _check(p["gamma"] >= 0, "gamma must be >= 0")
    _check(p["lambda_min"] <= p["lambda_max"], "need lambda_min <= lambda_max")
    _check(p["xi_cutoff"] >= 10 and p["step"] > 0 and p["nodes"] >= 1, "need xi_cutoff >= 10, step > 0, nodes >= 1")
    est = sobolev_integral(p["gamma"], (p["lambda_min"], p["lambda_max"]), p["xi_cutoff"], p["depth"],
                           p["step"], p["nodes"])
    res = RunResult()
    row = {"gamma": est.gamma, "lambda_min": est.lambda_range[0], "lambda_max": est.lambda_range[1],
           "xi_cutoff": est.xi_cutoff, "value": est.value, "value_half_cutoff": est.value_half,
           "cutoff_error_estimate": est.value - est.value_half, "refinement_ratio": est.refinement_ratio,
           "step": est.step, "nodes": est.nodes}
    res.table("sobolev", list(row), [row])
    res.audit("refinement-ratio", est.refinement_ratio <= p["max_refinement_ratio"], est.refinement_ratio,
              p["max_refinement_ratio"])
    res.summary = row
    return res


def run_rho_check(p, workers):
    from .fourier import RHO_LOWER, decay_audit, phi_hat, rho_integral_check

    phi = Observable.from_json(p["observable"])
    _check(RHO_LOWER < p["a"] < p["b"] < 0.99, f"[a, b] must lie in ({RHO_LOWER:.4f}, 0.99)")
    _check(phi.support_hint is not None and phi.left == phi.right,
           "rho-check needs a compactly supported observable")
    _check(phi.smooth_order >= 2, "rho-check needs a C2 observable")
    _check(p["xi_cutoff"] >= 10 and p["nodes"] >= 1 and 1 <= p["h_depth"] <= 26,
           "need xi_cutoff >= 10, nodes >= 1, 1 <= h_depth <= 26")
    _check(p["decay_alpha"] > 0 and p["decay_xi_max"] > 20, "need decay_alpha > 0 and decay_xi_max > 20")
    rep = rho_integral_check(p["a"], p["b"], phi, p["xi_cutoff"], p["nodes"], h_depth=p["h_depth"],
                             h_seed=p["seed"])
    res = RunResult()
    row = {"a": rep.a, "b": rep.b, "rho_integral": rep.rho_integral, "h_a": rep.h_a, "h_b": rep.h_b,
           "h_diff": rep.h_diff, "h_diff_error": rep.h_error, "discrepancy": rep.discrepancy, "tol": p["tol"],
           "xi_cutoff": rep.xi_cutoff, "xi_step": rep.step, "nodes": rep.nodes, "cutoff_flags": rep.cutoff_flags,
           "seed": p["seed"]}
    res.table("rho_check", list(row), [row])
    res.audit("rho-integral", rep.discrepancy < p["tol"], rep.discrepancy, p["tol"])
    grid, v = decay_audit(phi, p["decay_alpha"], 10.0, p["decay_xi_max"])
    qerr = phi_hat(phi, grid, check=True).quadrature_error
    res.table("decay", ["xi", "abs_phi_hat_times_xi_alpha", "quadrature_error"],
              [{"xi": x, "abs_phi_hat_times_xi_alpha": y, "quadrature_error": qerr * x ** p["decay_alpha"]}
               for x, y in zip(grid, v)])
    # bounded: the last octave does not exceed the first
    first, last = float(np.max(v[grid <= 20.0])), float(np.max(v[grid >= grid[-1] / 2]))
    res.audit("decay-bounded", last <= first, last, first, alpha=p["decay_alpha"])
    res.summary = row
    return res


def _response_point(args):
    from .response import diff_quotient, response

    label, obs, lam, order, depth, mode, n, seed, fd = args
    phi = Observable.from_json(obs)
    r = response(phi, lam, order=order, depth=depth, mode=mode, n=n, seed=seed)
    row = {"observable": label, "lam": lam, "h": r.h.value, "h_error": r.h.error_bound}
    if r.h_prime is not None:
        row["h_prime"], row["h_prime_error"] = r.h_prime.value, r.h_prime.error_bound
    if r.h_second is not None:
        row["h_second"], row["h_second_error"] = r.h_second.value, r.h_second.error_bound
    if mode == "mc":
        row["seed"] = seed
    if fd is not None:
        q = diff_quotient(phi, lam - fd, 2.0 * fd, depth=depth)
        row["central_fd"], row["central_fd_error"] = q.value, q.error_bound
        if r.h_prime is not None:
            row["fd_residual"] = abs(r.h_prime.value - q.value) / (1.0 + abs(r.h_prime.value))
    return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()}


def run_response_curve(p, workers):
    from .symbolic import check_lambda

    lam_lo = _validated(check_lambda, p["lambda_min"])
    lam_hi = _validated(check_lambda, p["lambda_max"])
    _check(lam_lo <= lam_hi and p["n_lambda"] >= 1, "need lambda_min <= lambda_max and n_lambda >= 1")
    _check(p["order"] in (0, 1, 2), "order must be 0, 1 or 2")
    _check(1 <= p["depth"] <= 26, "depth must lie in [1, 26]")
    if p["mode"] == "mc":
        _check(p["n_samples"] >= 100, "n_samples must be >= 100")
    fd = p["fd_step"]
    if fd is not None:
        _check(fd > 0, "fd_step must be positive")
        _validated(check_lambda, lam_lo - fd)
        _validated(check_lambda, lam_hi + fd)
        _check(p["order"] >= 1, "fd_step needs order >= 1")
    for label, obs in p["observables"].items():
        phi = Observable.from_json(obs)
        if phi.smooth_order < p["order"]:
            raise ConfigError(f"observable {label!r} is {phi.smoothness}; order {p['order']} unavailable")
    lams = np.linspace(lam_lo, lam_hi, p["n_lambda"])
    jobs = [(label, obs, float(lam), p["order"], p["depth"], p["mode"], p["n_samples"], p["seed"], fd)
            for label, obs in p["observables"].items() for lam in lams]
    rows = _pmap(_response_point, jobs, workers)
    cols = ["observable", "lam", "h", "h_error"]
    if p["order"] >= 1:
        cols += ["h_prime", "h_prime_error"]
    if p["order"] >= 2:
        cols += ["h_second", "h_second_error"]
    if fd is not None:
        cols += ["central_fd", "central_fd_error", "fd_residual"]
    if p["mode"] == "mc":
        cols.append("seed")
    res = RunResult()
    if p["reference"] == "second-moment":
        cols += ["closed_h", "closed_h_prime", "closed_h_second"]
        bad_h, rel1, rel2 = 0, 0.0, 0.0
        for r in rows:
            lam = r["lam"]
            r["closed_h"] = 1.0 / (1.0 - lam ** 2)
            r["closed_h_prime"] = 2.0 * lam / (1.0 - lam ** 2) ** 2
            r["closed_h_second"] = 2.0 * (1.0 + 3.0 * lam ** 2) / (1.0 - lam ** 2) ** 3
            bad_h += abs(r["h"] - r["closed_h"]) > r["h_error"]
            if "h_prime" in r:
                rel1 = max(rel1, abs(r["h_prime"] - r["closed_h_prime"]) / abs(r["closed_h_prime"]))
            if "h_second" in r:
                rel2 = max(rel2, abs(r["h_second"] - r["closed_h_second"]) / abs(r["closed_h_second"]))
        res.audit("h-within-error-bound", bad_h == 0, bad_h, 0)
        if p["order"] >= 1:
            res.audit("h-prime-relative", rel1 <= p["ref_rel_h_prime"], rel1, p["ref_rel_h_prime"])
        if p["order"] >= 2:
            res.audit("h-second-relative", rel2 <= p["ref_rel_h_second"], rel2, p["ref_rel_h_second"])
    if fd is not None:
        worst = max(r["fd_residual"] for r in rows)
        res.audit("central-difference", worst < p["fd_tol"], worst, p["fd_tol"])
    res.table("response_curve", cols, rows)
    res.summary = {"points": len(rows), "observables": list(p["observables"])}
    return res


def _dimdrop(p):
    from .observables import dimension_drop_phi

    _check(p["lambda0"] > 0 and p["n_max"] >= 1, "need lambda0 > 0 and n_max >= 1")
    _check(1 <= p["depth"] <= 26, "depth must lie in [1, 26]")
    return _validated(dimension_drop_phi, p["lambda0"], p["theta"], p["n_max"])


def run_diff_scan(p, workers):
    from .response import blowup_scan

    phi, layers, cfg = _dimdrop(p)
    eps = cfg.eps_ladder if p["eps"] is None else tuple(p["eps"])
    _check(len(eps) >= 2, "need at least two ladder steps")
    _check(all(e > 0 for e in eps) and all(b < a for a, b in zip(eps, eps[1:])),
           "eps ladder must be positive and strictly decreasing")
    table = _validated(blowup_scan, phi, cfg.lambda0, eps, p["depth"],
                       layers=layers if len(eps) == len(layers) else None)
    res = RunResult()
    res.table("diff_scan", table.COLUMNS, table.as_records())
    q = table.quotients
    ratio = q[-1] / q[0] if q[0] != 0 else math.inf
    res.audit("monotone-increase", table.monotone_increasing(), q, None)
    res.audit("final-over-first", ratio >= p["min_ratio"], ratio, p["min_ratio"])
    resid = [r.identity_residual for r in table.rows if r.identity_residual is not None]
    if resid:
        res.audit("decomposition-identity", max(resid) <= p["identity_tol"], max(resid), p["identity_tol"])
    res.summary = {"eps": list(eps), "levels": list(cfg.levels), "m0": cfg.m0, "beta": cfg.beta,
                   "quotients": q, "ratio": ratio}
    return res


def _window_point(args):
    from .response import response

    n, comp, lam, depth = args
    r = response(Observable.from_json(comp), lam, order=1, depth=depth).h_prime
    return {"n": n, "lam": lam, "h_prime": float(r.value), "h_prime_error": float(r.error_bound),
            "certified_nonnegative": bool(r.value - r.error_bound >= 0)}


def run_dimension_drop(p, workers):
    from .observables import holder_norm_estimate
    from .response import response

    _check(p["window_samples"] >= 1 and p["holder_grid"] >= 1 << 10,
           "need window_samples >= 1 and holder_grid >= 1024")
    _, layers, cfg = _dimdrop(p)
    theta = cfg.theta
    floor = 3.0 / 8.0 * 2.0 ** -cfg.m0
    rows, ok_a, ok_b, ok_c = [], True, True, True
    for n, layer in enumerate(layers, start=1):
        comp = layer.components[0]
        est = holder_norm_estimate(layer, theta, p["holder_grid"], layer.support_hint)
        sup = max(est.sup_grid, abs(comp.left), abs(comp.right))
        sup_bound = 2.0 * n ** (-2.0 * theta / (1.0 - theta)) * n ** -2.0
        hol_bound = 4.0 * n ** -2.0
        hp = response(layer, cfg.lambda0, order=1, depth=p["depth"]).h_prime
        rows.append({"n": n, "level": comp.level, "cover_length": cfg.cover_lengths[n - 1], "ramp": comp.ramp,
                     "sup_norm": sup, "sup_bound": sup_bound, "holder_modulus": est.lower_estimate,
                     "holder_bound": hol_bound, "h_prime": float(hp.value), "h_prime_error": float(hp.error_bound),
                     "h_prime_floor": floor})
        ok_a &= sup < sup_bound
        ok_b &= est.lower_estimate <= hol_bound
        ok_c &= hp.value - hp.error_bound >= floor
    res = RunResult()
    res.table("layers", list(rows[0]), rows)
    lo, hi = cfg.window
    k = p["window_samples"]
    lams = lo + (np.arange(k) + 0.5) * (hi - lo) / k
    jobs = [(n, json.loads(layer.to_json()), float(lam), p["depth"])
            for n, layer in enumerate(layers, start=1) for lam in lams]
    win = _pmap(_window_point, jobs, workers)
    res.table("window", ["n", "lam", "h_prime", "h_prime_error", "certified_nonnegative"], win)
    res.audit("a-sup-norm", ok_a, [r["sup_norm"] for r in rows], [r["sup_bound"] for r in rows])
    res.audit("b-holder-modulus", ok_b, [r["holder_modulus"] for r in rows], [r["holder_bound"] for r in rows])
    res.audit("c-derivative-floor", ok_c, [r["h_prime"] - r["h_prime_error"] for r in rows], floor)
    neg = sum(r["h_prime"] < 0 for r in win)
    res.audit("d-window-nonnegative", neg == 0, min(r["h_prime"] for r in win), 0.0,
              certified=sum(r["certified_nonnegative"] for r in win), samples=len(win))
    res.summary = {"eps0": cfg.eps0, "m0": cfg.m0, "beta": cfg.beta, "levels": list(cfg.levels),
                   "window": [lo, hi], "checks": cfg.checks}
    return res


def _adapted_config(p):
    from .adapted import adapted_params

    return _validated(adapted_params, p["delta"], p["alpha"], p["theta1"], p["theta2"], p["beta"])


def run_adapted_pair(p, workers):
    from .adapted import MAX_K, adapted_pair_build, adapted_pair_verify, demo_scan

    base = _adapted_config(p)
    _check(1 <= p["k_max"] <= MAX_K, f"k_max must lie in [1, {MAX_K}]")
    _check(base.delta < p["lam"] < 0.5 - base.delta, f"lam must lie in ({base.delta}, {0.5 - base.delta})")
    _check(p["n_seeds"] >= 2 and 1 <= p["demo_k_max"] <= 6, "need n_seeds >= 2 and 1 <= demo_k_max <= 6")
    _check(1 <= p["depth"] <= 26, "depth must lie in [1, 26]")
    pair = adapted_pair_build(base, p["k_max"])
    rep = adapted_pair_verify(pair, p["n_seeds"], p["seed"], p["lam"], p["depth"], p["empirical_max_N"])
    res = RunResult()
    srows = []
    for k, (n, e) in enumerate(zip(pair.N, pair.eps), start=1):
        srows.append({"k": k, "log2_N": pair.log2_N[k - 1], "N": n if n.bit_length() <= 64 else None,
                      "eps": mpmath.nstr(e, 17), "log2_eps": float(mpmath.log(e, 2)), "error_bound": 0.0})
    res.table("scales", ["k", "N", "log2_N", "eps", "log2_eps", "error_bound"], srows)
    crows = []
    for name, checks in (("growth", None), ("sum", rep.condition2), ("eps_star", rep.condition3),
                         ("tail", rep.condition4)):
        if checks is None:
            for i, g in enumerate(rep.growth, start=2):
                crows.append({"condition": name, "n": i, "ok": g, "note": "N_n > 2 N_(n-1)"})
            continue
        for c in checks:
            # logs come from 256-bit arithmetic; only the final float rounding remains
            err = 2.0 ** -52 * max(abs(c.lhs_log2) if math.isfinite(c.lhs_log2) else 0.0, abs(c.rhs_log2))
            crows.append({"condition": name, "n": c.n, "lhs_log2": c.lhs_log2, "rhs_log2": c.rhs_log2,
                          "error_bound": err, "ok": c.ok, "note": c.note})
    res.table("conditions", ["condition", "n", "lhs_log2", "rhs_log2", "error_bound", "ok", "note"], crows)
    erows = []
    for k, st in rep.empirical:
        erows.append({"k": k, "N": st.N, "seed": st.seed, "n_seeds": st.n_seeds,
                      "max_mean_over_se": st.max_mean_over_se, "holder_event_freq": st.holder_event_freq,
                      "derivative_event_freq": st.derivative_event_freq, "joint_event_freq": st.joint_event_freq})
    res.table("empirical", ["k", "N", "seed", "n_seeds", "max_mean_over_se", "holder_event_freq",
                            "derivative_event_freq", "joint_event_freq"], erows)
    table, info = demo_scan(pair, p["lam"], p["demo_k_max"], p["seed"], p["depth"])
    drows = []
    for rec in table.as_records():
        rec["seed"] = p["seed"]
        drows.append(rec)
    res.table("demo_scan", table.COLUMNS + ("seed",), drows)
    res.table("demo_layers", ["k", "N", "eps", "derivative", "holder_norm", "event", "T_floor", "seed"],
              [{**d.__dict__, "seed": p["seed"]} for d in info])
    res.audit("build", True, len(pair.N), p["k_max"])
    res.audit("conditions-growth-2-4", rep.deterministic_ok, None, None)
    res.audit("eps-star", rep.eps_star_ok, None, None)
    resid = max(r.identity_residual for r in table.rows)
    res.audit("decomposition-identity", resid <= p["identity_tol"], resid, p["identity_tol"])
    res.summary = {"config": pair.to_dict(), "N_1": pair.N[0]}
    return res


def _variance_point(args):
    from .adapted import derivative_event_stats

    e, cfg, lam, n_seeds, seed, depth = args
    return derivative_event_stats(1 << e, cfg, lam, n_seeds, seed, depth, holder=False)


def run_gbm_audit(p, workers):
    from .adapted import derivative_event_stats
    from .concentration import gbm_sup_audit

    cfg = _adapted_config(p)
    _check(cfg.delta < p["lam"] < 0.5 - cfg.delta, f"lam must lie in ({cfg.delta}, {0.5 - cfg.delta})")
    _check(p["n_seeds"] >= 2 and p["N"] >= 2 and p["sup_N"] >= 2 and p["sup_trials"] >= 1,
           "need n_seeds >= 2, N >= 2, sup_N >= 2, sup_trials >= 1")
    _check(len(p["slope_exponents"]) >= 2 and all(2 <= e <= 16 for e in p["slope_exponents"]),
           "slope_exponents needs at least two entries in [2, 16]")
    _check(p["holder_grid"] >= 1 << 10 and 1 <= p["depth"] <= 26, "need holder_grid >= 1024 and depth in [1, 26]")
    st = derivative_event_stats(p["N"], cfg, p["lam"], p["n_seeds"], p["seed"], p["depth"], grid=p["holder_grid"])
    bound = float(p["N"]) ** -cfg.beta
    res = RunResult()
    res.table("per_seed", ["seed", "stream", "holder_norm", "holder_bound", "derivative_sum"],
              [{"seed": p["seed"], "stream": i, "holder_norm": h, "holder_bound": bound, "derivative_sum": d}
               for i, (h, d) in enumerate(zip(st.holder_norms, st.derivatives))])
    reps = _pmap(_variance_point, [(e, cfg, p["lam"], p["n_seeds"], p["seed"], p["depth"])
                                   for e in p["slope_exponents"]], workers)
    logn = np.log([float(r.N) for r in reps])
    v = np.array([r.var_normalized for r in reps])
    ve = np.array([r.var_exact_mean * 4.0 ** r.m for r in reps])
    slope = float(np.polyfit(logn, np.log(v), 1)[0])
    slope_exact = float(np.polyfit(logn, np.log(ve), 1)[0])
    target = 2.0 * cfg.theta1 - cfg.theta2
    rel = abs(slope - target) / abs(target)
    res.table("variance", ["N", "m", "var_normalized", "var_exact_normalized", "be_ratio", "be_trend", "seed",
                           "n_seeds"],
              [{"N": r.N, "m": r.m, "var_normalized": r.var_normalized, "var_exact_normalized": x,
                "be_ratio": r.be_ratio, "be_trend": r.be_trend, "seed": r.seed, "n_seeds": r.n_seeds}
               for r, x in zip(reps, ve)])
    sup = gbm_sup_audit(p["sup_N"], cfg.theta1, cfg.theta2, cfg.rho, cfg.beta, cfg.two_u, p["sup_trials"], p["seed"])
    res.audit("holder-frequency", st.holder_event_freq >= p["holder_freq_min"], st.holder_event_freq,
              p["holder_freq_min"], upper_bound_freq=st.holder_upper_freq)
    res.audit("mean-within-4se", st.mean_within_4se, st.max_mean_over_se, 4.0)
    res.audit("variance-slope", rel <= p["slope_tol"], slope, target, relative_error=rel, exact_slope=slope_exact)
    res.audit("sup-norm-tail", sup.passed, sup.empirical, sup.bound, **sup.details)
    res.summary = {"config": cfg.to_dict(), "N": st.N, "m": st.m, "derivative_event_freq": st.derivative_event_freq,
                   "joint_event_freq": st.joint_event_freq, "slope": slope, "slope_exact": slope_exact,
                   "target": target}
    return res


def _convolution_point(args):
    from .fourier import convolution_residual

    lam, xi, m, depth = args
    return convolution_residual(lam, xi, m, depth)


def _derivative_bound_point(args):
    from .fourier import derivative_bound_audit

    lam, xi, n, depth = args
    a = derivative_bound_audit(lam, xi, n, depth)
    return a.lhs, a.rhs, a.holds


def small_union_case(rng, delta, lam, max_level):
    """One admissible configuration: a random base cylinder and at most L short intervals in it."""
    from .measure import small_union_constants
    from .symbolic import cylinder_of

    m = int(rng.integers(0, max_level))
    word = tuple(int(s) for s in rng.choice([-1, 1], size=m))
    base = cylinder_of(lam, word)
    L, _, rp = small_union_constants(delta)
    r = int(rng.integers(1, L + 1))
    budget = rp * lam ** m / (1.0 - lam)
    lengths = rng.dirichlet(np.ones(r)) * budget * rng.uniform(0.01, 0.999)
    starts = rng.uniform(base.lo, base.hi - lengths)
    return base, list(zip(starts.tolist(), (starts + lengths).tolist()))


def _small_union_point(args):
    from .measure import small_union_check
    from .symbolic import cylinder_of

    delta, lam, word, pieces = args
    return small_union_check(delta, lam, cylinder_of(lam, word), pieces)


def run_bounds_audit(p, workers):
    from .concentration import azuma_audit, berry_esseen_audit
    from .measure import small_union_constants
    from .symbolic import check_lambda

    seed = p["seed"]
    chosen = list(dict.fromkeys(p["audits"]))
    _check(chosen, "audits must name at least one audit")
    c, d, s = p["convolution"], p["derivative-bound"], p["small-union"]
    if "convolution" in chosen:
        _validated(check_lambda, c["lambda_min"])
        _validated(check_lambda, c["lambda_max"])
        _check(0 < c["xi_min"] <= c["xi_max"] and c["n_lambda"] >= 1 and c["n_xi"] >= 1,
               "convolution grid is empty or has xi <= 0")
        _check(c["m_values"] and all(m >= 1 for m in c["m_values"]), "m_values must be positive")
    if "derivative-bound" in chosen:
        _validated(check_lambda, d["lambda_min"])
        _validated(check_lambda, d["lambda_max"])
        _check(1 <= d["n_max"] <= d["depth"] and d["n_cases"] >= 1, "need 1 <= n_max <= depth and n_cases >= 1")
    if "small-union" in chosen:
        _check(0 < s["delta"] < 0.25 and s["delta"] < s["lam"] < 0.5 - s["delta"],
               "small-union needs 0 < delta < 1/4 and delta < lam < 1/2 - delta")
        _check(s["n_cases"] >= 1 and 1 <= s["max_level"] <= 16, "need n_cases >= 1 and 1 <= max_level <= 16")
    for key in ("azuma", "berry-esseen"):
        if key in chosen:
            _check(p[key]["n_trials"] >= 1, f"{key}.n_trials must be >= 1")
    res = RunResult()
    if "convolution" in chosen:
        lams = np.linspace(c["lambda_min"], c["lambda_max"], c["n_lambda"])
        xis = np.geomspace(c["xi_min"], c["xi_max"], c["n_xi"])
        jobs = [(float(l), float(x), int(m), c["depth"]) for l in lams for x in xis for m in c["m_values"]]
        out = _pmap(_convolution_point, jobs, workers)
        res.table("convolution", ["lam", "xi", "m", "residual", "tol"],
                  [{"lam": l, "xi": x, "m": m, "residual": r, "tol": c["tol"]} for (l, x, m, _), r in zip(jobs, out)])
        worst = max(out)
        res.audit("convolution-identity", worst < c["tol"], worst, c["tol"], cases=len(out))
    if "derivative-bound" in chosen:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
        k = d["n_cases"]
        lam = rng.uniform(d["lambda_min"], d["lambda_max"], k)
        xi = rng.uniform(-d["xi_max"], d["xi_max"], k)
        n = rng.integers(0, d["n_max"], k)
        jobs = [(float(a), float(b), int(c_), d["depth"]) for a, b, c_ in zip(lam, xi, n)]
        out = _pmap(_derivative_bound_point, jobs, workers)
        rows = [{"case": i, "seed": seed, "lam": j[0], "xi": j[1], "n": j[2], "lhs": o[0], "rhs": o[1],
                 "holds": o[2]} for i, (j, o) in enumerate(zip(jobs, out))]
        res.table("derivative_bound", ["case", "seed", "lam", "xi", "n", "lhs", "rhs", "holds"], rows)
        bad = sum(not o[2] for o in out)
        res.audit("derivative-bound", bad == 0, bad, 0, cases=k)
    if "small-union" in chosen:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
        jobs = []
        for _ in range(s["n_cases"]):
            base, pieces = small_union_case(rng, s["delta"], s["lam"], s["max_level"])
            jobs.append((s["delta"], s["lam"], base.word.signs, pieces))
        out = _pmap(_small_union_point, jobs, workers)
        rows = [{"case": i, "seed": seed, "level": len(j[2]), "pieces": len(j[3]), "total_length": r.total_length,
                 "length_budget": r.length_budget, "mass_upper": r.mass_upper,
                 "half_cylinder_mass": r.half_cylinder_mass, "hypothesis_met": r.hypothesis_met,
                 "verdict": r.verdict} for i, (j, r) in enumerate(zip(jobs, out))]
        res.table("small_union", ["case", "seed", "level", "pieces", "total_length", "length_budget", "mass_upper",
                                  "half_cylinder_mass", "hypothesis_met", "verdict"], rows)
        ok = sum(bool(r.hypothesis_met and r.verdict) for r in out)
        res.audit("small-union", ok == len(out), ok, len(out), constants=list(small_union_constants(s["delta"])))
    conc = []
    if "azuma" in chosen:
        a = p["azuma"]
        r = azuma_audit(a["n_steps"], a["threshold"], a["n_trials"], seed)
        conc.append(r)
        res.audit("azuma-printed-bound", r.passed, r.empirical, r.bound)
        res.audit("azuma-classical-bound", r.classical_passed, r.empirical, r.classical_bound)
        res.audit("azuma-binomial-oracle", r.oracle_agrees, abs(r.empirical - r.oracle), 3.0 * r.oracle_sigma,
                  exact=r.oracle)
    if "berry-esseen" in chosen:
        b = p["berry-esseen"]
        r = berry_esseen_audit(b["n_summands"], b["n_intervals"], b["n_trials"], seed, b["c"])
        conc.append(r)
        res.audit("berry-esseen", r.passed, r.empirical, r.bound, lattice_discrepancy=r.oracle)
        res.audit("berry-esseen-binomial-oracle", r.oracle_agrees, r.details["max_empirical_vs_exact"],
                  5.0 * r.oracle_sigma)
    if conc:
        res.table("concentration", ["audit", "n_trials", "seed", "empirical", "bound", "passed", "classical_bound",
                                    "oracle", "oracle_sigma"],
                  [{"audit": r.kind, "n_trials": r.n_trials, "seed": r.seed, "empirical": r.empirical,
                    "bound": r.bound, "passed": r.passed, "classical_bound": r.classical_bound, "oracle": r.oracle,
                    "oracle_sigma": r.oracle_sigma} for r in conc])
    res.summary = {"audits": chosen}
    return res


RUNNERS = {
    "fourier-scan": run_fourier_scan,
    "sobolev": run_sobolev,
    "rho-check": run_rho_check,
    "response-curve": run_response_curve,
    "diff-scan": run_diff_scan,
    "dimension-drop": run_dimension_drop,
    "adapted-pair": run_adapted_pair,
    "gbm-audit": run_gbm_audit,
    "bounds-audit": run_bounds_audit,
}


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

class NothingToReport(LabError):
    code = "nothing-to-report"


class MissingManifest(LabError):
    code = "missing-manifest"


def load_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.is_file():
        raise MissingManifest(f"manifest not found: {path}")
    try:
        return path, json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MissingManifest(f"manifest {path} is not valid JSON: {exc}") from None


def report(paths):
    """Merge the audit verdicts of several manifests.

    Returns (rows, all_passed). Raises NothingToReport for an empty input set
    or when no manifest carries an audit.
    """
    if not paths:
        raise NothingToReport("nothing to report")
    rows = []
    for p in paths:
        path, m = load_manifest(p)
        for a in m.get("audits", []):
            rows.append({"manifest": str(path), "label": m.get("label", m.get("command")),
                         "command": m.get("command"), "audit": a["name"], "passed": bool(a["passed"]),
                         "value": a.get("value"), "bound": a.get("bound"),
                         "flag": "" if a["passed"] else "FAILED"})
    if not rows:
        raise NothingToReport("nothing to report")
    return rows, all(r["passed"] for r in rows)
