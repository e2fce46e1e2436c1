"""
Long sweeps over the published parameter ranges; run with -m slow
"""

import pytest

from torus_que.experiments import ExperimentConfig, get_experiment
from torus_que.observables import TrigPolynomial
from torus_que.propagators import calibrate_sign, kronecker
from torus_que.spectra import remainder_profile
from torus_que.utils import read_csv
from torus_que.weyl import eigenbasis_monomial

pytestmark = pytest.mark.slow


def test_que_kron_full_range(tmp_path):
    config = ExperimentConfig.from_mapping(
        {
            "experiment": "que-kron",
            "schedule": {"range": {"start": 2, "stop": 400}},
            "out": str(tmp_path / "que-kron.csv"),
            "workers": 4,
        }
    )
    result = get_experiment("que-kron")(config).run()
    assert result.summary["exact_zero_threshold"] == 4

    _, rows, _ = read_csv(result.paths[0])
    assert len(rows) == 399
    assert all(row[5] == "1" for row in rows if int(row[0]) >= 4)


@pytest.mark.parametrize("n", [256, 1024])
def test_large_dimension_remainder_vanishes(alpha, n):
    prop = kronecker(alpha, n)
    profile = remainder_profile(
        eigenbasis_monomial(prop.operator), TrigPolynomial.monomial((1, 1))
    )
    assert profile.exact_zero


def test_calibration_over_five_octaves(cosine_shear):
    result = calibrate_sign(cosine_shear, dims=(32, 64, 128, 256, 512))
    assert result.sign == -1
    assert result.slopes[-1] <= -1.8
    assert result.slopes[1] > -1.0
    assert len(result.defects[-1]) == 5


def test_perturbed_conjugation_defect_rate(tmp_path):
    config = ExperimentConfig.from_mapping(
        {
            "experiment": "perturbed",
            "out": str(tmp_path / "perturbed.csv"),
            "workers": 4,
        }
    )
    result = get_experiment("perturbed")(config).run()
    summary = result.summary
    assert result.data.dims == [32, 64, 128, 256, 512]

    norm_fit = summary["conjugation_norm_fit"]
    assert norm_fit["slope"] <= -1.8
    assert norm_fit["r_squared"] >= 0.9
    assert summary["conjugation_fit"]["slope"] <= -1.8

    # the rest of the remainder is the Kronecker remainder of f . Phi_h
    for row in result.data.rows:
        n = str(row.n)
        bound = summary["conjugation_defects"][n] + summary["sheared_remainders"][n]
        assert row.remainder_max <= bound + 1e-9
