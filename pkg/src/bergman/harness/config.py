"""Experiment configuration: JSON schema, defaults, validation and sampling."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError, GroupError
from ..groups import FiniteUnitaryGroup, group_from_config
from ..jets import MAX_ORDER
from ..kernels import VARIANTS, KernelSpec

EXPERIMENTS = (
    "einstein-check",
    "ma-check",
    "b-limit",
    "fefferman",
    "kernel-identity",
    "group-validate",
)

DEFAULT_TOLERANCE = {
    "einstein-check": 1e-8,
    "ma-check": 1e-8,
    "kernel-identity": 1e-8,
    "b-limit": 1e-2,
    "fefferman": 0.1,
    "group-validate": 1e-10,
}

SEED_TYPES = ("perturbed-ball", "ball", "generic", "bergman")


@dataclass
class ExperimentConfig:
    experiment: str
    dimension: int = 2
    group: dict = field(default_factory=lambda: {"type": "trivial"})
    variant: str = "averaged"
    sampling: dict = field(default_factory=dict)
    tolerance: float | None = None
    jet_order: int = MAX_ORDER
    output: dict = field(default_factory=lambda: {"format": "json", "path": "-"})
    seed_field: dict = field(default_factory=lambda: {"type": "perturbed-ball", "epsilon": 0.1})
    ma_constant: float | None = None
    cross_check: bool = False

    @property
    def tol(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return DEFAULT_TOLERANCE[self.experiment]

    def build_group(self) -> FiniteUnitaryGroup:
        try:
            return group_from_config(self.group, self.dimension)
        except (GroupError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("group", str(exc)) from None

    def kernel_spec(self) -> KernelSpec:
        try:
            return KernelSpec(self.dimension, self.build_group(), self.variant)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("variant", str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "dimension": self.dimension,
            "group": self.group,
            "variant": self.variant,
            "sampling": self.sampling,
            "tolerance": self.tol,
            "jet_order": self.jet_order,
            "output": self.output,
            "seed_field": self.seed_field,
            "ma_constant": self.ma_constant,
            "cross_check": self.cross_check,
        }


def _default_sampling(experiment: str) -> dict:
    if experiment in ("b-limit", "fefferman"):
        return {
            "type": "ray",
            "direction": [1.0],
            "radii": {"start": 0.8, "stop": 1 - 0.2 * 2.0**-9, "count": 10,
                      "spacing": "geometric-to-one"},
        }
    return {"type": "random", "seed": 0, "count": 50, "max_radius": 0.95}


def _require(cond: bool, fld: str, msg: str) -> None:
    if not cond:
        raise ConfigError(fld, msg)


def _validate_sampling(s: dict, n: int) -> dict:
    s = copy.deepcopy(s)
    kind = s.get("type")
    if kind == "ray":
        d = s.get("direction", [1.0])
        _require(isinstance(d, list) and len(d) >= 1, "sampling.direction", "must be a list")
        vec = np.array([complex(*x) if isinstance(x, list) else complex(x) for x in d])
        if len(vec) < n:
            vec = np.concatenate([vec, np.zeros(n - len(vec))])
        _require(len(vec) == n, "sampling.direction", f"needs {n} components")
        norm = float(np.linalg.norm(vec))
        _require(norm > 0, "sampling.direction", "must be nonzero")
        vec = vec / norm
        s["direction"] = [[float(x.real), float(x.imag)] for x in vec]
        radii = s.get("radii", {})
        if isinstance(radii, list):
            values = [float(x) for x in radii]
        else:
            start = float(radii.get("start", 0.8))
            stop = float(radii.get("stop", 1 - 0.2 * 2.0**-9))
            count = int(radii.get("count", 10))
            spacing = radii.get("spacing", "geometric-to-one")
            _require(count >= 2, "sampling.radii.count", "must be >= 2")
            _require(0 < start < stop < 1, "sampling.radii", "need 0 < start < stop < 1")
            if spacing == "geometric-to-one":
                gaps = np.geomspace(1 - start, 1 - stop, count)
                values = list(1 - gaps)
            elif spacing == "linear":
                values = list(np.linspace(start, stop, count))
            else:
                raise ConfigError("sampling.radii.spacing", f"unknown spacing {spacing!r}")
        arr = np.array(values)
        _require(bool(np.all((arr > 0) & (arr < 1))), "sampling.radii", "radii must lie in (0, 1)")
        _require(bool(np.all(np.diff(arr) > 0)), "sampling.radii", "radii must be strictly increasing")
        s["radii"] = [float(x) for x in arr]
    elif kind == "random":
        s.setdefault("seed", 0)
        s.setdefault("count", 50)
        s.setdefault("max_radius", 0.95)
        _require(isinstance(s["seed"], int), "sampling.seed", "must be an integer")
        _require(int(s["count"]) >= 0, "sampling.count", "must be >= 0")
        _require(0 < float(s["max_radius"]) < 1, "sampling.max_radius", "must lie in (0, 1)")
    elif kind == "grid":
        box = s.get("box", [-0.5, 0.5])
        _require(len(box) == 2 and box[0] < box[1], "sampling.box", "need [lo, hi] with lo < hi")
        _require(int(s.get("counts", 3)) >= 1, "sampling.counts", "must be >= 1")
        s.setdefault("max_radius", 0.95)
        s["box"] = [float(box[0]), float(box[1])]
        s["counts"] = int(s.get("counts", 3))
    else:
        raise ConfigError("sampling.type", f"unknown sampling type {kind!r}")
    return s


def parse_config(raw: dict, experiment: str | None = None) -> ExperimentConfig:
    """Validate a config dict; ``experiment`` overrides ``raw["experiment"]``."""
    _require(isinstance(raw, dict), "<root>", "config must be a JSON object")
    exp = experiment or raw.get("experiment")
    _require(exp in EXPERIMENTS, "experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    n = raw.get("dimension", 2)
    _require(isinstance(n, int) and n >= 1, "dimension", "must be a positive integer")

    group = raw.get("group", {"type": "trivial"})
    _require(isinstance(group, dict) and "type" in group, "group", "must be an object with 'type'")

    variant = raw.get("variant", raw.get("kernel", {}).get("variant", "averaged"))
    _require(variant in VARIANTS, "variant", f"must be one of {', '.join(VARIANTS)}")

    tol = raw.get("tolerance")
    if tol is not None:
        _require(isinstance(tol, (int, float)) and tol > 0, "tolerance", "must be positive")
        tol = float(tol)

    order = raw.get("jet_order", MAX_ORDER)
    _require(isinstance(order, int) and 0 <= order <= MAX_ORDER, "jet_order",
             f"must be an integer in [0, {MAX_ORDER}]")

    output = dict(raw.get("output", {}))
    output.setdefault("format", "json")
    output.setdefault("path", "-")
    _require(output["format"] in ("json", "csv"), "output.format", "must be 'json' or 'csv'")

    seed_field = dict(raw.get("seed_field", {"type": "perturbed-ball", "epsilon": 0.1}))
    _require(seed_field.get("type") in SEED_TYPES, "seed_field.type",
             f"must be one of {', '.join(SEED_TYPES)}")

    c = raw.get("ma_constant")
    if c is not None:
        _require(isinstance(c, (int, float)), "ma_constant", "must be a number")

    sampling = raw.get("sampling") or _default_sampling(exp)
    sampling = _validate_sampling(sampling, n)

    cfg = ExperimentConfig(
        experiment=exp,
        dimension=n,
        group=group,
        variant=variant,
        sampling=sampling,
        tolerance=tol,
        jet_order=order,
        output=output,
        seed_field=seed_field,
        ma_constant=None if c is None else float(c),
        cross_check=bool(raw.get("cross_check", False)),
    )
    cfg.kernel_spec()  # surfaces group / variant errors early
    return cfg


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None


# ---------------------------------------------------------------------------


def sample_points(cfg: ExperimentConfig) -> list[tuple[float | None, np.ndarray]]:
    """``(t, z)`` pairs; ``t`` is the ray parameter or ``None``."""
    s = cfg.sampling
    n = cfg.dimension
    if s["type"] == "ray":
        d = np.array([complex(re, im) for re, im in s["direction"]])
        return [(t, t * d) for t in s["radii"]]
    if s["type"] == "random":
        rng = np.random.default_rng(s["seed"])
        out = []
        for _ in range(int(s["count"])):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            v /= np.linalg.norm(v)
            radius = float(s["max_radius"]) * rng.uniform() ** (1 / (2 * n))
            out.append((None, radius * v))
        return out
    lo, hi = s["box"]
    axis = np.linspace(lo, hi, s["counts"])
    out = []
    for coords in np.array(np.meshgrid(*([axis] * (2 * n)), indexing="ij")).reshape(2 * n, -1).T:
        z = coords[:n] + 1j * coords[n:]
        if np.linalg.norm(z) <= s["max_radius"]:
            out.append((None, z))
    return out


def random_ball_points(n: int, count: int, max_radius: float, seed: int) -> list[np.ndarray]:
    """Seeded uniform sample of the ball of radius ``max_radius`` in ``C^n``."""
    cfg = ExperimentConfig(
        experiment="einstein-check",
        dimension=n,
        sampling={"type": "random", "seed": seed, "count": count, "max_radius": max_radius},
    )
    return [z for _, z in sample_points(cfg)]


def ray_radii_default() -> list[float]:
    return [1 - 0.2 * 2.0**-k for k in range(10)]


def finite_or_none(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x
