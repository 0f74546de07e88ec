"""Experiment configuration, RNG streams and deterministic serialization."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError

# Every tolerance and threshold used elsewhere, with its default.
DEFAULTS: dict = {
    "body": {"type": "simplex", "dimension": 1},
    "metric": {"kind": None, "kappa": 0.0},
    "map": None,
    "generator": None,
    "x": None,
    "y": None,
    "master_seed": 0,
    "seeds": {"count": 100, "radius": 1.0},
    "n_steps": 10_000,
    "t0": 1.0,
    "horizon": 1000.0,
    "t_step": 1.0,
    "boundary_tol": 1e-10,
    "face_tol": 1e-8,
    "segment_samples": 64,
    "tail_fraction": 0.25,
    "cluster_radius": 1e-3,
    "window": 64,
    "r_bound": 10.0,
    "r_esc": 25.0,
    "slope_esc": 0.5,
    "slope_flat": 0.05,
    "approach": {"lam": 0.5, "steps": 40, "tail": 8},
    "horoball": {"pole": None, "center": None, "radius": 0.0, "kind": "big", "grid": 41},
    "tol_star": 1e-6,
    "pull_rel": 1e-7,
    "shrink_radii": [4.0, 2.0, 0.0, -2.0, -4.0, -8.0],
    "shrink_grid": 400,
    "shrink_final": 0.05,
    "metric_tol": 1e-9,
    "kobayashi_slack": 1e-12,
    "nonexpansive_tol": 1e-9,
    "tol_dw": 1e-3,
    "sup_tail_tol": 1e-6,
    "axiom2star_steps": 40,
    "axiom2star_growth": 5.0,
    "a3prime_threshold": -10.0,
    "a3prime_steps": 30,
    "bridge_radius": -8.0,
    "samples": {
        "condition_c": 100_000,
        "axiom5": 100_000,
        "kobayashi": 10_000,
        "metric_axioms": 10_000,
        "consistency": 10_000,
        "nonexpansive": 10_000,
        "axiom2star": 40,
        "a3prime": 60,
        "star_eta": 100,
        "star_s": 10,
        "seeds": 100,
    },
    "out": None,
    "format": "json",
}


def _merge(base, over):
    if isinstance(base, dict) and isinstance(over, dict):
        out = dict(base)
        for k, v in over.items():
            out[k] = _merge(base.get(k), v) if k in base else v
        return out
    return over


class ExperimentConfig:
    """User settings layered over :data:`DEFAULTS`."""

    def __init__(self, data: dict | None = None):
        data = {} if data is None else data
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        self.user = copy.deepcopy(data)
        self.data = _merge(copy.deepcopy(DEFAULTS), self.user)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)

    def sample_count(self, name: str) -> int:
        return int(self.data["samples"][name])

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return ExperimentConfig(_merge(self.user, kw))

    @property
    def digest(self) -> str:
        return hashlib.sha256(dumps(self.data).encode()).hexdigest()

    def rng(self, task: int, seed: int | None = None) -> np.random.Generator:
        return task_rng(self.data["master_seed"] if seed is None else seed, task)


def load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return ExperimentConfig(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def task_rng(master_seed: int, task: int) -> np.random.Generator:
    """Stream for one task: the task index is mixed into the seed sequence's spawn key.

    Streams depend only on (master_seed, task), never on scheduling order.
    """
    if master_seed < 0 or task < 0:
        raise ValueError("seeds and task indices must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(task),)))


def thread_cap() -> int:
    raw = os.environ.get("HD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _dump(obj, indent, level):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl if indent else ", "
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = fmt_float(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v, 0, 0) for v in obj) + "]"
        return "[" + nl + sep.join(pad + _dump(v, indent, level + 1) for v in obj) + nl + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items())
        return "{" + nl + sep.join(pad + json.dumps(k) + ": " + _dump(v, indent, level + 1) for k, v in items) + nl + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and floats at 17 significant digits (non-finite floats as strings)."""
    return _dump(_to_plain(obj), indent, 0)


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(lines) + "\n"
