import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import SEED, random_poly
from torus_que import oracle
from torus_que.errors import ObservableError
from torus_que.observables import (
    TrigPolynomial,
    compose_shear,
    compose_translation,
    exponential_family,
    gaussian_family,
    poisson_bracket,
    quantize,
    slow_convergence_observable,
    time_average,
    translation_factor,
)
from torus_que.weyl import WeylIndex, eigenbasis_monomial, weyl_operator

GRID = np.linspace(0.0, 1.0, 17, endpoint=False)
AXIOM_DIMS = (8, 16, 32, 64, 128)


def test_zero_coefficients_are_dropped():
    f = TrigPolynomial({(1, 0): 0.0, (0, 1): 2.0})
    assert len(f) == 1
    assert f == TrigPolynomial.monomial((0, 1), 2.0)
    assert (f - f) == TrigPolynomial.zero()


def test_evaluate_matches_direct_sum():
    f = TrigPolynomial.from_terms([((1, 2), 0.5), ((-3, 0), 1j)])
    p, q = np.meshgrid(GRID, GRID, indexing="ij")
    direct = 0.5 * np.exp(2j * np.pi * (p + 2 * q)) + 1j * np.exp(-6j * np.pi * p)
    np.testing.assert_allclose(f.evaluate(p, q), direct, atol=1e-12)


def test_json_object_round_trip():
    f = TrigPolynomial.from_terms([((1, -2), 0.5 - 1j), ((0, 0), 3.0)])
    assert TrigPolynomial.loads(f.dumps()) == f
    assert f.to_json_object()["1,-2"] == [0.5, -1.0]


def test_poisson_bracket_of_exponentials():
    bracket = poisson_bracket(
        TrigPolynomial.monomial((1, 0)), TrigPolynomial.monomial((0, 1))
    )
    assert bracket[(1, 1)] == pytest.approx(-4 * math.pi**2)
    assert len(bracket) == 1


def test_poisson_bracket_matches_derivatives(rng):
    f, g = random_poly(rng, 4, 2), random_poly(rng, 4, 2)
    p, q = np.meshgrid(GRID, GRID, indexing="ij")

    def derivative_q(h: TrigPolynomial) -> TrigPolynomial:
        return TrigPolynomial({n: 2j * np.pi * n.n2 * c for n, c in h.items()})

    expected = f.derivative_p().evaluate(p, q) * derivative_q(g).evaluate(p, q) - (
        derivative_q(f).evaluate(p, q) * g.derivative_p().evaluate(p, q)
    )
    bracket = poisson_bracket(f, g).evaluate(p, q)
    np.testing.assert_allclose(bracket, expected, atol=1e-8)


def test_antiderivative_inverts_derivative():
    v = TrigPolynomial.from_terms([((1, 0), 1.0), ((-1, 0), 1.0), ((3, 0), 0.25j)])
    w = v.antiderivative_p()
    assert w.mean() == 0
    for n, c in v.items():
        assert w.derivative_p()[n] == pytest.approx(c)


def test_antiderivative_needs_p_only_mean_zero():
    with pytest.raises(ObservableError):
        TrigPolynomial.monomial((1, 1)).antiderivative_p()
    with pytest.raises(ObservableError):
        TrigPolynomial.constant(1.0).antiderivative_p()


def test_quantization_is_linear_combination_of_weyl_operators(rng):
    f = random_poly(rng, 5, 3)
    n = 11
    expected = sum(c * weyl_operator(k, n).to_matrix() for k, c in f.items())
    np.testing.assert_allclose(quantize(f, n).to_matrix(), expected, atol=1e-12)


def test_quantization_respects_adjoints(rng):
    f = random_poly(rng, 5, 3)
    matrix = quantize(f, 10).to_matrix()
    conjugated = quantize(f.conj(), 10).to_matrix()
    np.testing.assert_allclose(conjugated, matrix.conj().T, atol=1e-12)


def random_pair(pair: int, radius: int) -> tuple[TrigPolynomial, TrigPolynomial]:
    rng = np.random.default_rng(SEED + pair)
    return random_poly(rng, 4, radius), random_poly(rng, 4, radius)


@pytest.mark.parametrize("n", AXIOM_DIMS)
def test_translation_conjugation_is_exact(rng, n):
    f = random_poly(rng)
    op_f = quantize(f, n).to_matrix()
    for k1, k2 in rng.integers(-n, n, size=(3, 2)):
        t = weyl_operator((int(k1), int(k2)), n).to_matrix()
        shift = (Fraction(int(k2), n), Fraction(-int(k1), n))
        expected = quantize(compose_translation(f, shift), n).to_matrix()
        np.testing.assert_allclose(t.conj().T @ op_f @ t, expected, atol=1e-12)


@pytest.mark.parametrize("pair", range(5))
def test_product_defect_shrinks(pair):
    f, g = random_pair(pair, 1)
    defects = []
    for n in AXIOM_DIMS:
        product = quantize(f, n).to_matrix() @ quantize(g, n).to_matrix()
        defect = product - quantize(f * g, n).to_matrix()
        # normalized Hilbert-Schmidt norm, the l2 norm of the Weyl coefficients
        defects.append(np.linalg.norm(defect) / np.sqrt(n))
    assert defects[-1] <= 0.1 * defects[0]
    assert defects[-1] < defects[-2] < defects[-3]


@pytest.mark.parametrize("pair", range(5))
def test_commutator_tracks_poisson_bracket(pair):
    f, g = random_pair(pair, 2)
    bracket = poisson_bracket(f, g)
    defects = []
    for n in AXIOM_DIMS:
        op_f, op_g = quantize(f, n).to_matrix(), quantize(g, n).to_matrix()
        scaled = n / (2j * np.pi) * (op_f @ op_g - op_g @ op_f)
        # (N / 2 pi i) [Op f, Op g] -> -Op({f, g}) / 4 pi^2
        defect = scaled + quantize(bracket, n).to_matrix() / (4 * np.pi**2)
        defects.append(oracle.operator_norm(oracle.DenseOperator(defect)))
    assert defects[-1] <= 0.1 * defects[0]
    assert defects[-1] < defects[-2] < defects[-3]


def test_support_guard_is_opt_in():
    f = TrigPolynomial.monomial((70, 0))
    quantize(f, 8)
    with pytest.raises(ObservableError):
        quantize(f, 8, max_frequency=64)


def test_rational_translation_is_exact():
    factor = translation_factor(WeylIndex(1, 0), (Fraction(1, 4), 0))
    assert factor == pytest.approx(1j, abs=1e-15)
    f = TrigPolynomial.monomial((1, 2), 3.0)
    shifted = compose_translation(f, (Fraction(1, 8), Fraction(1, 16)))
    assert shifted[(1, 2)] == pytest.approx(3.0 * np.exp(2j * np.pi * 0.25))


def test_compose_shear_matches_pointwise_composition():
    f = TrigPolynomial.from_terms([((0, 1), 1.0), ((1, 2), 0.5)])
    h = TrigPolynomial.from_terms([((1, 0), 0.05), ((-1, 0), 0.05)])
    composed = compose_shear(f, h)
    p, q = np.meshgrid(GRID, GRID, indexing="ij")
    shifted_q = q + np.real(h.evaluate(p))
    np.testing.assert_allclose(
        composed.poly.evaluate(p, q), f.evaluate(p, shifted_q), atol=1e-10
    )
    assert composed.tail_bound < 1e-10


def test_compose_shear_rejects_q_dependent_profile():
    with pytest.raises(ObservableError):
        compose_shear(TrigPolynomial.monomial((0, 1)), TrigPolynomial.monomial((1, 1)))


def test_compose_shear_with_zero_profile_is_identity():
    f = TrigPolynomial.monomial((2, 3))
    assert compose_shear(f, TrigPolynomial.zero()).poly == f


@pytest.mark.parametrize("steps", [1, 2, 5, 12])
def test_time_average_preserves_kronecker_matrix_elements(rng, steps):
    n, a = 12, (5, 7)
    basis = eigenbasis_monomial(weyl_operator((-a[1], a[0]), n))
    f = random_poly(rng, 8, 3)
    plain = quantize(f, n).diagonal_elements(basis.vectors)
    f_avg = time_average(f, a, n, steps)
    averaged = quantize(f_avg, n).diagonal_elements(basis.vectors)
    np.testing.assert_allclose(averaged, plain, atol=1e-10)


def test_full_period_average_keeps_only_resonant_terms():
    f = TrigPolynomial.from_terms([((1, 0), 1.0), ((1, 1), 2.0)])
    # n . a = 0 mod 6 only for (1, 1) with a = (1, 5)
    assert time_average(f, (1, 5), 6, 6) == TrigPolynomial.monomial((1, 1), 2.0)


def test_families():
    ray = gaussian_family((1, 1), 1.0, 5)
    assert ray.poly[(1, 1)] == pytest.approx(1.0)
    assert ray.poly[(5, 5)] == pytest.approx(math.exp(-4.0))
    assert ray.tail_bound == pytest.approx(math.exp(-5.0) / (1 - math.exp(-1.0)))

    smooth = exponential_family(1.0, 3)
    assert smooth.poly.support_radius() == 3
    assert len(smooth.poly) == 48
    assert smooth.poly.is_real()
    assert smooth.poly.mean() == 0

    slow = slow_convergence_observable([1, 4, 17])
    assert slow[(0, 4)] == pytest.approx(math.exp(-4))
    assert slow.depends_on_q()


def test_family_arguments_are_checked():
    with pytest.raises(ValueError):
        exponential_family(0.0)
    with pytest.raises(ObservableError):
        gaussian_family((0, 0), 1.0)
