import json

import pytest

from torus_que.errors import ConfigError
from torus_que.experiments.config import (
    ExperimentConfig,
    build_observable,
    cli_schedule,
    default_geometric,
    schedule_dims,
    schedule_entries,
)
from torus_que.observables import SmoothTruncation, TrigPolynomial


def test_defaults():
    config = ExperimentConfig.from_mapping({"experiment": "que-kron"})
    assert config.alpha == ("sqrt(2)", "sqrt(3)")
    assert config.workers == 1
    assert not config.record_timing
    assert config.shear_profile() == TrigPolynomial.from_terms(
        [((1, 0), 1.0), ((-1, 0), 1.0)]
    )


def test_mapping_round_trip():
    config = ExperimentConfig.from_mapping(
        {
            "experiment": "perturbed",
            "alpha": ["sqrt(5)", "1/3"],
            "V": {"1,0": [0.5, 0.0], "-1,0": [0.5, 0.0]},
            "schedule": {"list": [8, 16, 32]},
            "seed": 7,
            "working_bits": 128,
        }
    )
    assert ExperimentConfig.from_mapping(config.to_mapping()) == config
    assert config.targets()[1].is_rational


@pytest.mark.parametrize(
    "data, field",
    [
        ({"experiment": "que-kron", "colour": 1}, "colour"),
        ({"experiment": "nope"}, "experiment"),
        ({}, "experiment"),
        ({"experiment": "que-kron", "alpha": "sqrt(2)"}, "alpha"),
        ({"experiment": "que-kron", "alpha": ["sqrt(two)"]}, "alpha"),
        ({"experiment": "que-kron", "levels": 1.5}, "levels"),
        ({"experiment": "que-kron", "workers": True}, "workers"),
        ({"experiment": "que-kron", "record_timing": "yes"}, "record_timing"),
        ({"experiment": "que-kron", "growth": "x +"}, "growth"),
        ({"experiment": "que-kron", "V": [1, 2]}, "V"),
        ({"experiment": "que-kron", "working_bits": 32}, "working_bits"),
    ],
)
def test_invalid_fields_are_named(data, field):
    with pytest.raises(ConfigError) as excinfo:
        ExperimentConfig.from_mapping(data)
    assert excinfo.value.field == field


def test_yaml_error_reports_line(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("experiment: que-kron\nalpha: [sqrt(2)\nseed: 3\n")
    with pytest.raises(ConfigError) as excinfo:
        ExperimentConfig.load(path)
    assert excinfo.value.line is not None


def test_json_document_loads(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"alpha": ["sqrt(2)", "sqrt(3)"], "seed": 5}))
    config = ExperimentConfig.load(path, "egorov")
    assert config.experiment == "egorov"
    assert config.seed == 5


def test_load_rejects_mismatched_experiment(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment: egorov\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(path, "que-kron")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.yaml")


def test_geometric_schedule():
    assert schedule_dims(default_geometric()) == [32, 64, 128, 256, 512]


def test_diophantine_schedule():
    schedule = {"diophantine": {"gamma": 0.5, "delta": 0.5, "radii": [2, 3]}}
    assert schedule_entries(schedule) == [(4, 2), (9, 3)]


def test_range_and_list_schedules():
    assert schedule_dims({"range": {"start": 2, "stop": 5}}) == [2, 3, 4, 5]
    assert schedule_dims({"list": [3, 7]}) == [3, 7]
    bad_schedules = [
        {"list": [8, 8]},
        {"list": []},
        {"spiral": {}},
        {"list": [1], "range": {}},
    ]
    for bad in bad_schedules:
        with pytest.raises(ConfigError):
            schedule_dims(bad)


def test_cli_schedule():
    assert cli_schedule(None, None, None, default_geometric()) is None
    assert cli_schedule(2, 40, None, None) == {"range": {"start": 2, "stop": 40}}
    assert cli_schedule(16, None, None, default_geometric()) == {
        "geometric": {"start": 16, "stop": 512, "steps": 5}
    }
    assert cli_schedule(8, 64, 4, None) == {
        "geometric": {"start": 8, "stop": 64, "steps": 4}
    }


def test_observable_families(rng):
    assert build_observable({"family": "monomial", "n": [1, 1]}, rng) == (
        TrigPolynomial.monomial((1, 1))
    )
    ray = build_observable({"family": "ray", "direction": [1, 0], "radius": 4}, rng)
    assert isinstance(ray, SmoothTruncation)
    assert ray.radius == 4
    smooth = build_observable({"family": "exponential", "decay": 2.0}, rng, radius=2)
    assert smooth.radius == 2
    sampled = build_observable({"family": "random", "terms": 3, "radius": 2}, rng)
    assert 1 <= len(sampled) <= 3
    explicit = build_observable({"0,1": [1.0, 0.0]}, rng)
    assert explicit == TrigPolynomial.monomial((0, 1))


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "spiral"},
        {"family": "monomial"},
        {"family": "ray", "direction": [0, 0]},
        {"family": "exponential", "decay": 0},
        {"1;0": [1.0, 0.0]},
    ],
)
def test_bad_observables(rng, spec):
    with pytest.raises(ConfigError):
        build_observable(spec, rng)


def test_overrides_are_validated():
    config = ExperimentConfig.from_mapping({"experiment": "que-kron"})
    assert config.with_overrides(seed=3, out=None).seed == 3
    with pytest.raises(ConfigError):
        config.with_overrides(workers=0)
