import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn, dense_oracle
from gaborcs import (DomainError, GaborOperator, InvalidInputError, ResourceError, SparseCoeffs,
                     SupportSet, TFIndex, alltop_window, custom_window, modulate, sgn,
                     steinhaus_window, tf_shift, translate)
from gaborcs.gram import coherence


def test_translate_convention():
    h = np.arange(5.0)
    # (T_k h)[q] = h[q + k]
    assert np.array_equal(translate(h, 2), [2, 3, 4, 0, 1])
    assert np.array_equal(translate(h, -1), translate(h, 4))


def test_modulate_is_pointwise_phase():
    h = np.ones(4)
    assert np.allclose(modulate(h, 1), [1, 1j, -1, -1j])


def test_tf_shift_composes_translation_then_modulation(rng):
    h = crandn(rng, 7)
    assert np.allclose(tf_shift(h, (3, 5)), modulate(translate(h, 3), 5))
    assert np.allclose(tf_shift(h, (10, -2)), tf_shift(h, (3, 5)))


@given(st.integers(2, 12), st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30))
def test_translate_group_law(n, a, b, seed):
    h = np.random.default_rng(abs(seed)).standard_normal(n)
    assert np.allclose(translate(translate(h, a), b), translate(h, a + b))


def test_tfindex_column_roundtrip():
    n = 6
    for j in range(n * n):
        lam = TFIndex.from_column(j, n)
        assert lam.column(n) == j
    assert TFIndex(7, -1).reduced(6) == (1, 5)


def test_alltop_window_values():
    w = alltop_window(7)
    q = np.arange(7)
    assert np.allclose(w.values, np.exp(2j * np.pi * q ** 3 / 7) / np.sqrt(7))
    assert w.kind == "alltop"


@pytest.mark.parametrize("n", [2, 3, 4, 9, 15])
def test_alltop_rejects_non_prime_or_small(n):
    with pytest.raises(DomainError):
        alltop_window(n)


def test_steinhaus_window_unimodular_and_seeded():
    w = steinhaus_window(16, seed=3)
    assert np.allclose(np.abs(w.values), 0.25)
    assert np.array_equal(w.values, steinhaus_window(16, seed=3).values)
    assert not np.array_equal(w.values, steinhaus_window(16, seed=4).values)


def test_window_is_read_only():
    w = steinhaus_window(4, seed=0)
    with pytest.raises(ValueError):
        w.values[0] = 1


def test_custom_window_validation():
    assert np.isclose(np.linalg.norm(custom_window([3, 4j], normalize=True).values), 1)
    # custom windows may carry any norm
    assert np.allclose(custom_window([1, 1]).values, [1, 1])
    with pytest.raises(InvalidInputError):
        custom_window([0, 0], normalize=True)


def test_support_set_rejects_duplicates_and_keeps_order():
    s = SupportSet([(1, 2), (0, 0)], 3)
    assert list(s.columns) == [5, 0]
    with pytest.raises(InvalidInputError):
        SupportSet([(1, 2), (4, 5)], 3)
    assert (1, 2) in s and (2, 1) not in s
    assert s.complement_mask().sum() == 7


def test_sgn_zero_convention():
    assert np.allclose(sgn([0, 2, -3j]), [0, 1, -1j])


def test_sparse_coeffs_roundtrip(rng):
    x = np.zeros(16, dtype=complex)
    x[[3, 10]] = [1 + 1j, -2]
    c = SparseCoeffs.from_dense(x)
    assert c.nnz == 2
    assert np.array_equal(c.to_dense(), x)
    assert np.allclose(c.signs(), [(1 + 1j) / np.sqrt(2), -1])


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_dense_matrix_matches_entrywise_oracle(n):
    w = steinhaus_window(n, seed=n)
    assert np.allclose(GaborOperator(w).dense_matrix(), dense_oracle(w.values), atol=1e-13)


def test_columns_match_single_column():
    op = GaborOperator(steinhaus_window(6, seed=1))
    sup = SupportSet([(0, 0), (5, 1), (2, 3)], 6)
    cols = op.columns(sup)
    for i, lam in enumerate(sup):
        assert np.allclose(cols[:, i], op.column(lam))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2 ** 32 - 1))
def test_fast_transforms_match_dense(n, seed):
    rng = np.random.default_rng(seed)
    op = GaborOperator(steinhaus_window(n, seed))
    psi = dense_oracle(op.window.values)
    x, y = crandn(rng, n * n), crandn(rng, n)
    assert np.allclose(op.synthesize(x), psi @ x, atol=1e-10 * np.linalg.norm(x))
    assert np.allclose(op.analyze(y), psi.conj().T @ y, atol=1e-10 * np.linalg.norm(y))


def test_synthesize_accepts_sparse(rng):
    op = GaborOperator(steinhaus_window(8, seed=2))
    x = np.zeros(64, dtype=complex)
    x[[1, 40]] = crandn(rng, 2)
    assert np.allclose(op.synthesize(SparseCoeffs.from_dense(x)), op.synthesize(x))


def test_tight_frame(rng):
    op = GaborOperator(steinhaus_window(12, seed=0))
    y = crandn(rng, 12)
    assert np.isclose(np.linalg.norm(op.analyze(y)) ** 2, 12 * np.linalg.norm(y) ** 2)
    assert np.allclose(op.synthesize(op.analyze(y)), 12 * y)


def test_dense_matrix_size_guard():
    op = GaborOperator(steinhaus_window(65, seed=0))
    with pytest.raises(ResourceError):
        op.dense_matrix()


def test_wrong_length_inputs():
    op = GaborOperator(steinhaus_window(4, seed=0))
    with pytest.raises(InvalidInputError):
        op.synthesize(np.zeros(15))
    with pytest.raises(InvalidInputError):
        op.analyze(np.zeros(5))


@pytest.mark.parametrize("n", [5, 7, 11, 13])
def test_alltop_coherence(n):
    assert abs(coherence(GaborOperator(alltop_window(n))) - 1 / np.sqrt(n)) < 1e-10


def test_coherence_matches_dense_gram():
    w = steinhaus_window(6, seed=9)
    psi = dense_oracle(w.values)
    g = np.abs(psi.conj().T @ psi)
    np.fill_diagonal(g, 0)
    assert np.isclose(coherence(GaborOperator(w)), g.max())
