from fractions import Fraction

import numpy as np
import pytest

from conftest import random_state
from torus_que import oracle
from torus_que.errors import CommutationError, DimensionMismatchError
from torus_que.hilbert import dft_columns, inverse_dft_columns
from torus_que.weyl import (
    EigenBasis,
    ExactPhase,
    MonomialOperator,
    adjoint,
    commutes,
    compose,
    e_n,
    eigenbasis_monomial,
    identity,
    joint_eigenbasis,
    omega,
    power,
    weyl_operator,
)

PAIRS = [((1, 0), (0, 1)), ((2, -3), (5, 1)), ((-4, 7), (3, 3)), ((0, 0), (1, 2))]


def test_exact_phase_is_reduced_mod_two():
    phase = ExactPhase(5, 2)
    assert (phase.numerator, phase.denominator) == (1, 2)
    assert phase.to_complex() == pytest.approx(1j)
    assert ExactPhase(3, 4) * ExactPhase(5, 4) == ExactPhase.one()
    assert ExactPhase(1, 3).conjugate() == ExactPhase(5, 3)


def test_e_n_quarter_turn():
    assert e_n(1, 4) == ExactPhase(1, 2)
    assert e_n(Fraction(1, 2), 2) == ExactPhase(1, 2)


@pytest.mark.parametrize("m, n", PAIRS)
@pytest.mark.parametrize("dim", [1, 5, 12])
def test_composition_law(m, n, dim):
    left = compose(weyl_operator(m, dim), weyl_operator(n, dim))
    total = (m[0] + n[0], m[1] + n[1])
    right = weyl_operator(total, dim).times_phase(ExactPhase(omega(m, n), dim))
    assert left == right


def random_monomial(rng: np.random.Generator, dim: int) -> MonomialOperator:
    denominator = int(rng.integers(1, 13))
    numerators = rng.integers(0, 2 * denominator, size=dim)
    return MonomialOperator(rng.permutation(dim), numerators, denominator)


def random_frequency(rng: np.random.Generator, dim: int) -> tuple[int, int]:
    n1, n2 = rng.integers(-3 * dim, 3 * dim, size=2)
    return int(n1), int(n2)


@pytest.mark.parametrize("dim", [1, 6, 17, 64])
def test_composition_law_on_random_triples(rng, dim):
    for _ in range(10):
        m, n, k = (random_frequency(rng, dim) for _ in range(3))
        t_m, t_n, t_k = (weyl_operator(x, dim) for x in (m, n, k))
        product = compose(compose(t_m, t_n), t_k)
        assert product == compose(t_m, compose(t_n, t_k))

        mn = (m[0] + n[0], m[1] + n[1])
        total = (mn[0] + k[0], mn[1] + k[1])
        phase = ExactPhase(omega(m, n) + omega(mn, k), dim)
        assert product == weyl_operator(total, dim).times_phase(phase)

        dense = [oracle.materialize(t).entries for t in (t_m, t_n, t_k)]
        np.testing.assert_allclose(
            oracle.materialize(product).entries,
            dense[0] @ dense[1] @ dense[2],
            atol=1e-10,
        )


@pytest.mark.parametrize("dim", [2, 7, 16, 64])
def test_heisenberg_relation(rng, dim):
    t1, t2 = weyl_operator((1, 0), dim), weyl_operator((0, 1), dim)
    m1, m2 = t1.to_matrix(), t2.to_matrix()
    for a, b in rng.integers(-2 * dim, 2 * dim, size=(5, 2)):
        a, b = int(a), int(b)
        left = compose(power(t1, a), power(t2, b))
        right = compose(power(t2, b), power(t1, a))
        assert left == right.times_phase(e_n(a * b, dim))

        dense_left = np.linalg.matrix_power(m1, a) @ np.linalg.matrix_power(m2, b)
        dense_right = np.linalg.matrix_power(m2, b) @ np.linalg.matrix_power(m1, a)
        twist = np.exp(2j * np.pi * a * b / dim)
        np.testing.assert_allclose(dense_left, twist * dense_right, atol=1e-9)
        np.testing.assert_allclose(left.to_matrix(), dense_left, atol=1e-9)


@pytest.mark.parametrize("dim", [1, 5, 32, 64])
def test_monomial_algebra_matches_dense(rng, dim):
    for _ in range(5):
        a, b = random_monomial(rng, dim), random_monomial(rng, dim)
        dense_a = oracle.materialize(a).entries
        dense_b = oracle.materialize(b).entries
        np.testing.assert_allclose(
            oracle.materialize(compose(a, b)).entries, dense_a @ dense_b, atol=1e-12
        )
        np.testing.assert_allclose(
            oracle.materialize(adjoint(a)).entries, dense_a.conj().T, atol=1e-12
        )
        psi = random_state(rng, dim)
        np.testing.assert_allclose(
            a.apply(psi).entries, dense_a @ psi.entries, atol=1e-12
        )
        block = rng.standard_normal((dim, 3)) + 1j * rng.standard_normal((dim, 3))
        np.testing.assert_allclose(a.apply_columns(block), dense_a @ block, atol=1e-12)


@pytest.mark.parametrize("n", [(1, 0), (3, 5), (-2, 7)])
def test_adjoint_is_negated_frequency(n):
    assert adjoint(weyl_operator(n, 9)) == weyl_operator((-n[0], -n[1]), 9)


@pytest.mark.parametrize("n2", [0, 1, 2, 3])
def test_period_twist(n2):
    dim = 7
    shifted = weyl_operator((3 + dim, n2), dim)
    assert shifted == weyl_operator((3, n2), dim).times_phase(ExactPhase(n2, 1))


def test_huge_frequencies_reduce_exactly():
    dim = 7
    big = 1 + 2 * dim * 10**30
    assert weyl_operator((big, 3), dim) == weyl_operator((1, 3), dim)


@pytest.mark.parametrize("n", [(1, 1), (-3, 2)])
def test_weyl_operators_are_unitary(n):
    matrix = weyl_operator(n, 10).to_matrix()
    np.testing.assert_allclose(matrix.conj().T @ matrix, np.eye(10), atol=1e-12)


def test_power_matches_repeated_composition():
    op = weyl_operator((2, 3), 11)
    repeated = identity(11)
    for _ in range(5):
        repeated = compose(repeated, op)
    assert power(op, 5) == repeated
    assert power(op, -1) == adjoint(op)
    assert power(op, 0) == identity(11)


def test_fourier_conjugation_identities():
    n = 12
    f = dft_columns(np.eye(n, dtype=np.complex128))
    f_inv = inverse_dft_columns(np.eye(n, dtype=np.complex128))
    t1 = weyl_operator((1, 0), n).to_matrix()
    t2 = weyl_operator((0, 1), n).to_matrix()
    np.testing.assert_allclose(f @ t1 @ f_inv, t2, atol=1e-12)
    np.testing.assert_allclose(f @ t2 @ f_inv, np.linalg.inv(t1), atol=1e-12)
    # without the inverse the identity picks up a parity
    parity = f @ f
    np.testing.assert_allclose(f @ t1 @ f, t2 @ parity, atol=1e-12)


def test_commutation_of_level_operators():
    # second constructed level for g(x) = x: N = 64, b = 48, a = 91, d = 4
    assert omega((0, 4), (-48, 91)) % 64 == 0
    assert commutes(weyl_operator((0, 4), 64), weyl_operator((-48, 91), 64))
    assert not commutes(weyl_operator((1, 0), 64), weyl_operator((0, 1), 64))


def test_monomial_operator_rejects_non_permutations():
    with pytest.raises(ValueError):
        MonomialOperator(np.array([0, 0, 1]), np.zeros(3, dtype=np.int64))


def test_compose_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatchError):
        compose(identity(3), identity(4))


@pytest.mark.parametrize(
    "dim, a", [(1, (0, 0)), (7, (10, 12)), (12, (5, 7)), (64, (91, 111))]
)
def test_structured_eigenbasis(dim, a):
    op = weyl_operator((-a[1], a[0]), dim)
    basis = eigenbasis_monomial(op)
    assert len(basis) == dim
    np.testing.assert_allclose(basis.gram(), np.eye(dim), atol=1e-10)
    assert basis.residual(op) < 1e-10
    angles = [float(p.exponent) for p in basis.phases]
    assert angles == sorted(angles)


def test_shift_eigenvalues_are_roots_of_unity():
    basis = eigenbasis_monomial(weyl_operator((1, 0), 6))
    assert basis.phases[0] == ExactPhase.one()
    expected = np.exp(2j * np.pi * np.arange(6) / 6)
    np.testing.assert_allclose(basis.eigenvalues, expected, atol=1e-12)


def test_joint_eigenbasis_diagonalizes_both():
    a = weyl_operator((2, 0), 4)
    b = weyl_operator((0, 2), 4)
    basis = joint_eigenbasis(a, b)
    np.testing.assert_allclose(basis.gram(), np.eye(4), atol=1e-10)
    assert basis.residual(a) < 1e-10
    assert EigenBasis(basis.vectors, basis.joint_eigenvalues).residual(b) < 1e-10


def test_joint_eigenbasis_needs_commuting_pair():
    with pytest.raises(CommutationError):
        joint_eigenbasis(weyl_operator((1, 0), 5), weyl_operator((0, 1), 5))
