"""
Config - Experiment configuration: parsing, validation and CLI overrides

A configuration is a YAML (or JSON) mapping. Precedence is built-in
defaults < config file < command-line flags.
"""

import dataclasses
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from torus_que.constants import (
    DEFAULT_DECAY,
    DEFAULT_FAMILY_RADIUS,
    DEFAULT_GAMMA,
    DEFAULT_GEOMETRIC_START,
    DEFAULT_GEOMETRIC_STEPS,
    DEFAULT_GEOMETRIC_STOP,
    DEFAULT_LEVELS,
    DEFAULT_SCAN_RADIUS,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    MAX_DENSE_DIM,
    MIN_WORKING_BITS,
)
from torus_que.diophantine import RealTarget, parse_growth
from torus_que.errors import ConfigError, ObservableError
from torus_que.observables import (
    SmoothTruncation,
    TrigPolynomial,
    exponential_family,
    gaussian_family,
    random_trig_polynomial,
)

EXPERIMENT_NAMES: tuple[str, ...] = (
    "que-kron",
    "slow-conv",
    "perturbed",
    "perturbed-slow",
    "egorov",
    "dioph-scan",
)

# V(p) = 2 cos(2 pi p)
DEFAULT_V: dict[str, list[float]] = {"-1,0": [1.0, 0.0], "1,0": [1.0, 0.0]}

_FIELDS: tuple[str, ...] = (
    "experiment",
    "alpha",
    "V",
    "observable",
    "schedule",
    "growth",
    "levels",
    "gamma",
    "n_max",
    "out",
    "seed",
    "max_dense",
    "working_bits",
    "workers",
    "record_timing",
)


def _plain(value: object) -> object:
    """JSON-normal form (tuples become lists, keys become strings)"""
    return json.loads(json.dumps(value))


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run

    Attributes:
        experiment: one of EXPERIMENT_NAMES
        alpha: target strings, e.g. ("sqrt(2)", "sqrt(3)")
        v: shear profile as a trig-poly JSON object, or None
        observable: trig-poly JSON object or family object, or None for the
            experiment's default
        schedule: N schedule object, or None for the experiment's default
        growth: expression in x for g in the slow-convergence runs
        levels: constructed levels for the slow-convergence runs
        gamma: exponent for the diophantine scan and schedule
        n_max: frequency radius for the diophantine scan
        out: output path; None writes under results/
        seed: seed for random observables
        max_dense: dense oracle guard
        working_bits: mpmath precision override
        workers: worker threads for sweeps
        record_timing: write measured wall time instead of 0.0
    """

    experiment: str
    alpha: tuple[str, ...] = ("sqrt(2)", "sqrt(3)")
    v: dict | None = None
    observable: dict | None = None
    schedule: dict | None = None
    growth: str = "x"
    levels: int = DEFAULT_LEVELS
    gamma: float = DEFAULT_GAMMA
    n_max: int = DEFAULT_SCAN_RADIUS
    out: str | None = None
    seed: int = DEFAULT_SEED
    max_dense: int = MAX_DENSE_DIM
    working_bits: int | None = None
    workers: int = DEFAULT_WORKERS
    record_timing: bool = False

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("configuration must be a mapping")
        unknown = sorted(set(data) - set(_FIELDS))
        if unknown:
            raise ConfigError(f"unknown configuration key {unknown[0]!r}", unknown[0])
        if "experiment" not in data:
            raise ConfigError("missing experiment name", "experiment")

        experiment = str(data["experiment"])
        if experiment not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {experiment!r}; expected one of "
                f"{', '.join(EXPERIMENT_NAMES)}",
                "experiment",
            )

        kwargs: dict[str, object] = {"experiment": experiment}
        if "alpha" in data:
            alpha = data["alpha"]
            if isinstance(alpha, str | int) or not alpha:
                raise ConfigError("alpha must be a non-empty list of targets", "alpha")
            kwargs["alpha"] = tuple(str(a) for a in alpha)
            for spec in kwargs["alpha"]:
                _field_guard("alpha", RealTarget.parse, spec)
        for key, attr in (
            ("V", "v"),
            ("observable", "observable"),
            ("schedule", "schedule"),
        ):
            value = data.get(key)
            if value is not None and not isinstance(value, Mapping):
                raise ConfigError(f"{key} must be a mapping", key)
            if value is not None:
                kwargs[attr] = _plain(value)
        if data.get("growth") is not None:
            kwargs["growth"] = str(data["growth"])
            _field_guard("growth", parse_growth, kwargs["growth"])
        for key, kind in (
            ("levels", int),
            ("n_max", int),
            ("seed", int),
            ("max_dense", int),
            ("workers", int),
            ("gamma", float),
        ):
            if data.get(key) is not None:
                kwargs[key] = _coerce(key, data[key], kind)
        if data.get("working_bits") is not None:
            kwargs["working_bits"] = _coerce("working_bits", data["working_bits"], int)
        if data.get("out") is not None:
            kwargs["out"] = str(data["out"])
        if data.get("record_timing") is not None:
            if not isinstance(data["record_timing"], bool):
                message = "record_timing must be true or false"
                raise ConfigError(message, "record_timing")
            kwargs["record_timing"] = data["record_timing"]

        config = cls(**kwargs)
        config.validate()
        return config

    def to_mapping(self) -> dict[str, object]:
        return {
            "experiment": self.experiment,
            "alpha": list(self.alpha),
            "V": _plain(self.v),
            "observable": _plain(self.observable),
            "schedule": _plain(self.schedule),
            "growth": self.growth,
            "levels": self.levels,
            "gamma": self.gamma,
            "n_max": self.n_max,
            "out": self.out,
            "seed": self.seed,
            "max_dense": self.max_dense,
            "working_bits": self.working_bits,
            "workers": self.workers,
            "record_timing": self.record_timing,
        }

    @classmethod
    def load(
        cls, path: str | Path, experiment: str | None = None
    ) -> "ExperimentConfig":
        """Read a YAML/JSON document; experiment fills a missing name"""
        path = Path(path)
        try:
            with path.open(encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"cannot parse {path}: {e}", line=line) from e
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e}") from e
        if data is not None and not isinstance(data, Mapping):
            raise ConfigError(f"{path} must hold a mapping at the top level", line=1)
        data = dict(data or {})
        if experiment is not None:
            if data.get("experiment", experiment) != experiment:
                raise ConfigError(
                    f"config is for {data['experiment']!r}, not {experiment!r}",
                    "experiment",
                )
            data["experiment"] = experiment
        return cls.from_mapping(data)

    def with_overrides(self, **overrides: object) -> "ExperimentConfig":
        """Copy with non-None overrides applied, then re-validated"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        config = dataclasses.replace(self, **changes)
        config.validate()
        return config

    def validate(self) -> None:
        if self.levels < 1:
            raise ConfigError("levels must be at least 1", "levels")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1", "n_max")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive", "gamma")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", "workers")
        if self.max_dense < 1:
            raise ConfigError("max_dense must be at least 1", "max_dense")
        if self.working_bits is not None and self.working_bits < MIN_WORKING_BITS:
            raise ConfigError(
                f"working_bits must be at least {MIN_WORKING_BITS}", "working_bits"
            )
        if self.schedule is not None:
            schedule_dims(self.schedule)

    # ----- builders -----------------------------------------------------

    def targets(self) -> tuple[RealTarget, ...]:
        return tuple(RealTarget.parse(spec) for spec in self.alpha)

    def shear_profile(self) -> TrigPolynomial:
        """V from the config, or 2 cos(2 pi p) when unset"""
        data = self.v if self.v is not None else DEFAULT_V
        return _field_guard("V", TrigPolynomial.from_json_object, data)

    def build_observable(
        self, default: Mapping[str, object], radius: int | None = None
    ) -> TrigPolynomial | SmoothTruncation:
        spec = self.observable if self.observable is not None else dict(default)
        return build_observable(spec, np.random.default_rng(self.seed), radius)


def _coerce(key: str, value: object, kind: type) -> int | float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"{key} must be a number, got {value!r}", key)
    if kind is int and value != int(value):
        raise ConfigError(f"{key} must be an integer, got {value!r}", key)
    return kind(value)


def _field_guard(key: str, parse: object, value: object) -> object:
    try:
        return parse(value)
    except ConfigError as e:
        if e.field is None:
            raise ConfigError(str(e), key) from e
        raise
    except (ValueError, TypeError, KeyError, ObservableError) as e:
        raise ConfigError(f"invalid {key}: {e}", key) from e


def build_observable(
    spec: Mapping[str, object],
    rng: np.random.Generator,
    radius: int | None = None,
) -> TrigPolynomial | SmoothTruncation:
    """Observable from a family object or a trig-poly JSON object

    radius overrides a family's truncation radius (diophantine schedules).
    """
    family = spec.get("family")
    if family is None:
        return _field_guard("observable", TrigPolynomial.from_json_object, spec)
    try:
        if family == "monomial":
            n1, n2 = spec["n"]
            return TrigPolynomial.monomial((int(n1), int(n2)))
        if family == "ray":
            n1, n2 = spec["direction"]
            return gaussian_family(
                (int(n1), int(n2)),
                float(spec.get("decay", DEFAULT_DECAY)),
                radius or int(spec.get("radius", DEFAULT_FAMILY_RADIUS)),
            )
        if family == "exponential":
            return exponential_family(
                float(spec.get("decay", DEFAULT_DECAY)),
                radius or int(spec.get("radius", DEFAULT_FAMILY_RADIUS)),
            )
        if family == "random":
            return random_trig_polynomial(
                rng,
                int(spec.get("terms", 6)),
                radius or int(spec.get("radius", 3)),
                bool(spec.get("real", False)),
            )
    except (KeyError, TypeError, ValueError, ObservableError) as e:
        raise ConfigError(f"invalid {family} observable: {e}", "observable") from e
    raise ConfigError(f"unknown observable family {family!r}", "observable")


def schedule_dims(schedule: Mapping[str, object]) -> list[int]:
    """Strictly increasing list of N for a schedule object"""
    return [n for n, _ in schedule_entries(schedule)]


def schedule_entries(schedule: Mapping[str, object]) -> list[tuple[int, int | None]]:
    """(N, R) pairs; R is the truncation radius of a diophantine schedule"""
    if len(schedule) != 1:
        raise ConfigError("schedule needs exactly one kind", "schedule")
    kind, body = next(iter(schedule.items()))
    try:
        if kind == "list":
            entries = [(int(n), None) for n in body]
        elif kind == "range":
            stop = int(body["stop"]) + 1
            entries = [(n, None) for n in range(int(body["start"]), stop)]
        elif kind == "geometric":
            start, stop = int(body["start"]), int(body["stop"])
            steps = int(body["steps"])
            if steps < 2:
                raise ValueError("steps must be at least 2")
            ratio = (stop / start) ** (1 / (steps - 1))
            dims = sorted({round(start * ratio**k) for k in range(steps)})
            entries = [(n, None) for n in dims]
        elif kind == "diophantine":
            exponent = 1 + float(body["gamma"]) + float(body["delta"])
            entries = [(math.ceil(int(r) ** exponent), int(r)) for r in body["radii"]]
        else:
            raise ConfigError(f"unknown schedule kind {kind!r}", "schedule")
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid {kind} schedule: {e}", "schedule") from e

    dims = [n for n, _ in entries]
    if not dims or dims[0] < 1:
        raise ConfigError("schedule must contain positive N", "schedule")
    if any(b <= a for a, b in zip(dims, dims[1:], strict=False)):
        raise ConfigError("schedule must be strictly increasing", "schedule")
    return entries


def default_geometric() -> dict[str, dict[str, int]]:
    return {
        "geometric": {
            "start": DEFAULT_GEOMETRIC_START,
            "stop": DEFAULT_GEOMETRIC_STOP,
            "steps": DEFAULT_GEOMETRIC_STEPS,
        }
    }


def cli_schedule(
    n_min: int | None, n_max: int | None, n_steps: int | None, base: Mapping | None
) -> dict | None:
    """Schedule object from --n-min/--n-max/--n-steps on top of base"""
    if n_min is None and n_max is None and n_steps is None:
        return None
    start = n_min if n_min is not None else DEFAULT_GEOMETRIC_START
    stop = n_max if n_max is not None else DEFAULT_GEOMETRIC_STOP
    if base is not None and n_steps is None:
        kind, body = next(iter(base.items()))
        if kind == "geometric":
            n_steps = int(body["steps"])
    if n_steps is not None:
        return {"geometric": {"start": start, "stop": stop, "steps": n_steps}}
    return {"range": {"start": start, "stop": stop}}
