import numpy as np
import pytest
import scipy.optimize

from conftest import SEED
from torus_que import oracle
from torus_que.constants import MAX_CONCURRENT_DENSE
from torus_que.errors import DenseGuardError, NonNormalError
from torus_que.hilbert import dft_columns
from torus_que.weyl import MonomialOperator, eigenbasis_monomial, weyl_operator


def test_dense_dft_matches_fft_convention():
    n = 10
    np.testing.assert_allclose(
        oracle.dense_dft_matrix(n).entries,
        dft_columns(np.eye(n, dtype=np.complex128)),
        atol=1e-12,
    )
    assert oracle.dense_dft_matrix(n).is_unitary()


def random_kronecker(case: int) -> tuple[int, MonomialOperator]:
    rng = np.random.default_rng(SEED + case)
    dim = int(rng.integers(2, 65))
    a1, a2 = (int(x) for x in rng.integers(1, dim, size=2))
    return dim, weyl_operator((-a2, a1), dim)


@pytest.mark.parametrize("case", range(10))
def test_dense_eig_agrees_with_structured_basis(case):
    dim, op = random_kronecker(case)
    dense = oracle.dense_eig(oracle.materialize(op))
    structured = eigenbasis_monomial(op)
    np.testing.assert_allclose(dense.gram(), np.eye(dim), atol=1e-10)

    # one-to-one matching of the eigenvalue multisets
    distances = np.abs(dense.eigenvalues[:, None] - structured.eigenvalues[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(distances)
    assert len(rows) == dim
    assert np.max(distances[rows, cols]) <= 1e-9

    dense_clusters = oracle.eigenprojectors(dense)
    structured_clusters = oracle.eigenprojectors(structured)
    assert len(dense_clusters) == len(structured_clusters)
    for value, projector in dense_clusters:
        gaps = [abs(value - other) for other, _ in structured_clusters]
        _, twin = structured_clusters[int(np.argmin(gaps))]
        assert min(gaps) <= 1e-9
        assert np.linalg.norm(projector - twin, 2) <= 1e-8


def test_dense_eig_rejects_non_normal():
    jordan = oracle.DenseOperator(np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(NonNormalError):
        oracle.dense_eig(jordan)


def test_operator_norm_matches_numpy(rng):
    a = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    dense = oracle.DenseOperator(a)
    assert oracle.operator_norm(dense) == pytest.approx(np.linalg.norm(a, 2), rel=1e-6)
    assert oracle.operator_norm(oracle.DenseOperator(np.zeros((4, 4)))) == 0.0


def test_operator_norm_of_unitary():
    dense = oracle.materialize(weyl_operator((1, 2), 9))
    assert oracle.operator_norm(dense) == pytest.approx(1.0)


@pytest.mark.parametrize("shape", [(8, 8), (6, 4)])
def test_jacobi_matches_svd(rng, shape):
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    np.testing.assert_allclose(
        oracle.jacobi_singular_values(a),
        np.linalg.svd(a, compute_uv=False),
        rtol=1e-8,
    )


def test_materialize_guard():
    with pytest.raises(DenseGuardError):
        oracle.materialize(weyl_operator((1, 0), 16), max_dense=8)
    with pytest.raises(DenseGuardError):
        oracle.materialize(np.eye(16), max_dense=8)


def test_eigenprojectors_of_degenerate_shift():
    # T(2, 0) on H_4 has eigenvalues +1 and -1, each twice
    basis = oracle.dense_eig(oracle.materialize(weyl_operator((2, 0), 4)))
    clusters = oracle.eigenprojectors(basis)
    assert len(clusters) == 2
    assert sorted(round(value.real) for value, _ in clusters) == [-1, 1]
    for _, projector in clusters:
        assert np.trace(projector).real == pytest.approx(2.0)
    np.testing.assert_allclose(sum(p for _, p in clusters), np.eye(4), atol=1e-10)


def test_dense_concurrency_limit():
    with pytest.raises(ValueError):
        oracle.set_dense_concurrency(0)
    try:
        oracle.set_dense_concurrency(1)
        assert oracle.materialize(np.eye(3)).dim == 3
    finally:
        oracle.set_dense_concurrency(MAX_CONCURRENT_DENSE)
