import itertools

import numpy as np
import pytest

from torus_que.errors import UnnormalizedStateError
from torus_que.hilbert import StateVector, basis_state
from torus_que.observables import TrigPolynomial, exponential_family, quantize
from torus_que.propagators import kronecker, perturbed
from torus_que.spectra import (
    ExactVanishingReport,
    MatrixElementSweep,
    SweepRow,
    matrix_element,
    que_remainder,
    rate_fit,
    rate_fit_windows,
    remainder_profile,
    resonant_count,
    resonant_set,
    sweep_row,
    vanishing_threshold,
)
from torus_que.weyl import WeylIndex, eigenbasis_monomial, weyl_operator

DIAGONAL = TrigPolynomial.monomial((1, 1))


def test_matrix_element_of_momentum_phase():
    n, q = 8, 3
    op = quantize(TrigPolynomial.monomial((0, 1)), n)
    value = matrix_element(op, basis_state(n, q))
    assert value == pytest.approx(np.exp(2j * np.pi * q / n))


def test_matrix_element_needs_normalized_state():
    with pytest.raises(UnnormalizedStateError):
        matrix_element(quantize(DIAGONAL, 8), StateVector(2.0 * np.ones(8)))


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_non_resonant_remainder_vanishes(alpha, n):
    prop = kronecker(alpha, n)
    profile = remainder_profile(eigenbasis_monomial(prop.operator), DIAGONAL)
    assert profile.exact_zero
    assert profile.raw_max <= 1e-12
    assert resonant_count(prop.a, n, DIAGONAL) == 0


@pytest.mark.parametrize("dim", range(2, 129))
def test_non_resonant_matrix_elements_vanish(alpha, dim):
    prop = kronecker(alpha, dim)
    vectors = eigenbasis_monomial(prop.operator).vectors
    a1, a2 = prop.a
    for k in itertools.product(range(-8, 9), repeat=2):
        if (k[0] * a1 + k[1] * a2) % dim == 0:
            continue
        shifted = weyl_operator(k, dim).apply_columns(vectors)
        values = np.sum(shifted * vectors.conj(), axis=0) / dim
        assert np.max(np.abs(values)) <= 1e-12, k


def test_remainder_bound_includes_tail(alpha):
    f = exponential_family(1.0, 3)
    assert que_remainder(kronecker(alpha, 32), f) >= f.tail_bound


def test_resonant_set():
    assert resonant_set((1, 5), 6, 1) == [
        WeylIndex(-1, -1),
        WeylIndex(0, 0),
        WeylIndex(1, 1),
    ]
    assert resonant_set((1, 5), 6, 1, include_zero=False) == [
        WeylIndex(-1, -1),
        WeylIndex(1, 1),
    ]


def test_vanishing_threshold(alpha):
    # (1, 1) is resonant at N = 2, 3 and 6 for alpha = (sqrt 2, sqrt 3)
    assert vanishing_threshold(alpha, (1, 1), range(2, 41)) == 7
    assert vanishing_threshold(alpha, (1, 1), range(2, 7)) is None


def test_sweep_row_reads_kronecker_part(alpha, cosine_shear):
    row = sweep_row(perturbed(alpha, cosine_shear, 16), DIAGONAL)
    assert row.n == 16
    assert row.a == kronecker(alpha, 16).a


def test_sweep_csv_row():
    row = SweepRow(8, (11, 14), 0.0, 0.0, 0)
    assert row.to_csv_row() == ["8", "11", "14", "0.0", "0.0", "1", "0", "0.0"]


def test_exact_zero_threshold():
    values = [0.1, 0.0, 0.2, 0.0, 0.0]
    rows = [
        SweepRow(n, (0, 0), v, v, 0)
        for n, v in zip(range(6, 1, -1), values, strict=True)
    ]
    sweep = MatrixElementSweep("sqrt(2),sqrt(3)", DIAGONAL.dumps(), rows)
    assert sweep.dims == [2, 3, 4, 5, 6]
    # sorted by N the remainders read 0.0, 0.0, 0.2, 0.0, 0.1
    assert sweep.exact_zero_threshold() is None
    sweep.add(SweepRow(7, (0, 0), 0.0, 0.0, 0))
    assert sweep.exact_zero_threshold() == 7
    assert len(sweep.csv_rows()) == 6


def test_exact_zero_threshold_tail():
    rows = [SweepRow(n, (0, 0), v, v, 0) for n, v in [(2, 0.5), (3, 0.0), (4, 0.0)]]
    assert MatrixElementSweep("a", "f", rows).exact_zero_threshold() == 3


def test_rate_fit_recovers_power_law():
    pairs = [(n, 3.0 * n**-2.0) for n in (8, 16, 32, 64)]
    fit = rate_fit(pairs)
    assert fit.slope == pytest.approx(-2.0)
    assert fit.constant == pytest.approx(3.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_rate_fit_exact_vanishing():
    report = rate_fit([(n, 0.0) for n in (8, 16, 32, 64)])
    assert report == ExactVanishingReport(4)


def test_rate_fit_needs_enough_rows():
    with pytest.raises(ValueError):
        rate_fit([(8, 1.0), (16, 0.5)])


def test_rate_fit_windows():
    rows = [SweepRow(n, (0, 0), n**-1.0, n**-1.0, 0) for n in (4, 8, 16, 32, 64, 128)]
    windows = rate_fit_windows(rows)
    spans = [(first, last) for first, last, _ in windows]
    assert spans == [(4, 32), (8, 64), (16, 128)]
    for _, _, fit in windows:
        assert fit.slope == pytest.approx(-1.0)
