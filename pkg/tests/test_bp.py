import numpy as np
import pytest

from conftest import crandn
from gaborcs import (BPConfig, CertificateUnavailableError, DomainError, GaborOperator,
                     InvalidInputError, custom_window, NotRepresentableError, SparseCoeffs, SupportSet,
                     alltop_window, basis_pursuit, dual_certificate, l0_oracle,
                     pseudo_inverse_row_norm, sgn, steinhaus_window, verify_recovery)
from gaborcs.bp import certificate_vector, recovered_support, relative_error, soft_threshold
from gaborcs.gram import coherence, extremal_eigenvalues, gram_submatrix, random_support


def _instance(n, S, seed, window="steinhaus"):
    rng = np.random.default_rng(seed)
    w = alltop_window(n) if window == "alltop" else steinhaus_window(n, seed)
    op = GaborOperator(w)
    sup = random_support(n, S, rng)
    truth = SparseCoeffs(sup, np.exp(2j * np.pi * rng.random(S)))
    return op, truth


def test_config_defaults_and_validation():
    cfg = BPConfig()
    assert cfg.max_iterations == 20000 and cfg.recovery_tol == 1e-5
    tau, sigma = cfg.steps(64)
    assert np.isclose(tau, 0.99 / 8) and np.isclose(sigma, 0.99 / 8)
    with pytest.raises(DomainError):
        BPConfig(primal_step=1.0, dual_step=1.0).steps(4)
    with pytest.raises(DomainError):
        BPConfig(recovery_tol=0)


def test_soft_threshold():
    v = np.array([3 + 4j, 0.5, 0])
    out = soft_threshold(v, 1.0)
    assert np.allclose(out, [(3 + 4j) * 0.8, 0, 0])


def test_zero_signal():
    op = GaborOperator(steinhaus_window(8, seed=0))
    res = basis_pursuit(op, np.zeros(8))
    assert res.converged and res.l1_value == 0 and not res.coefficients.any()


def test_alltop_one_sparse():
    op = GaborOperator(alltop_window(13))
    truth = SparseCoeffs(SupportSet([(4, 9)], 13), [1.0])
    res = basis_pursuit(op, op.synthesize(truth))
    assert res.converged and res.residual <= BPConfig().convergence_tol
    assert verify_recovery(truth, res)


def test_certified_two_sparse_recovery():
    for seed in range(20):
        op, truth = _instance(8, 2, seed)
        if dual_certificate(op, truth.support, truth.signs()).certifies_uniqueness:
            break
    else:
        pytest.fail("no certified instance among 20 draws")
    res = basis_pursuit(op, op.synthesize(truth))
    assert verify_recovery(truth, res)
    assert recovered_support(truth, res) == truth.support


def test_optimality_gap_against_truth():
    op, truth = _instance(32, 3, 1)
    assert dual_certificate(op, truth.support, truth.signs()).certifies_uniqueness
    res = basis_pursuit(op, op.synthesize(truth))
    z1 = np.abs(truth.values).sum()
    assert res.converged
    assert abs(res.gap) <= 1e-4 * z1
    assert res.l1_value <= z1 + abs(res.gap) + 1e-9


def test_unique_minimizer_from_random_starts():
    op, truth = _instance(16, 2, 3)
    assert dual_certificate(op, truth.support, truth.signs()).certifies_uniqueness
    y = op.synthesize(truth)
    for s in range(5):
        x0 = crandn(np.random.default_rng(s), 256)
        assert verify_recovery(truth, basis_pursuit(op, y, x0=x0))


def test_scale_covariance():
    op, truth = _instance(16, 2, 4)
    y = op.synthesize(truth)
    base = basis_pursuit(op, y)
    c = 3.0 - 2.0j
    scaled = basis_pursuit(op, c * y)
    assert relative_error(c * base.coefficients, scaled) <= 1e-5


def test_nonconvergence_is_reported():
    op, truth = _instance(16, 3, 5)
    res = basis_pursuit(op, op.synthesize(truth), BPConfig(max_iterations=5))
    assert not res.converged and res.iterations == 5


def test_bp_input_validation():
    op = GaborOperator(steinhaus_window(4, seed=0))
    with pytest.raises(InvalidInputError):
        basis_pursuit(op, np.ones(5))
    with pytest.raises(InvalidInputError):
        basis_pursuit(op, np.ones(4), x0=np.zeros(3))


# ---------------------------------------------------------------- certificates

def test_one_sparse_certificate_is_column_coherence():
    op = GaborOperator(steinhaus_window(8, seed=2))
    lam = (3, 5)
    rep = dual_certificate(op, SupportSet([lam], 8), [1.0])
    corr = np.abs(op.analyze(op.column(lam)))
    corr[lam[0] * 8 + lam[1]] = 0
    assert np.isclose(rep.max_offsupport_magnitude, corr.max())
    assert rep.max_offsupport_magnitude <= coherence(op) + 1e-12


def test_certificate_on_support_equals_signs(rng):
    op, truth = _instance(16, 4, 8)
    P = certificate_vector(op, truth.support, truth.signs())
    assert np.allclose(P[truth.support.columns], truth.signs(), atol=1e-10)


def test_certificate_per_index_and_flag():
    op, truth = _instance(8, 2, 1)
    rep = dual_certificate(op, truth.support, truth.signs(), per_index=True)
    assert len(rep.per_index) == 64 - 2
    assert np.isclose(max(rep.per_index.values()), rep.max_offsupport_magnitude)
    assert rep.certifies_uniqueness == (rep.max_offsupport_magnitude < 1)


def test_alltop_certificates():
    for seed in range(10):
        op, truth = _instance(13, 2, seed, "alltop")
        assert dual_certificate(op, truth.support, truth.signs()).max_offsupport_magnitude < 1


def test_certificate_errors():
    # the four modulations of a delta window already span C^4, so a fifth atom is dependent
    delta = np.zeros(4, dtype=complex)
    delta[0] = 1
    op = GaborOperator(custom_window(delta))
    sup = SupportSet([(0, l) for l in range(4)] + [(1, 0)], 4)
    with pytest.raises(CertificateUnavailableError):
        dual_certificate(op, sup, np.ones(5))
    op2 = GaborOperator(steinhaus_window(4, seed=0))
    with pytest.raises(InvalidInputError):
        dual_certificate(op2, SupportSet([(0, 0)], 4), [0.5])
    with pytest.raises(InvalidInputError):
        dual_certificate(op2, SupportSet([(0, 0)], 4), [1, 1])


def test_pseudo_inverse_row_norm():
    op = GaborOperator(steinhaus_window(64, seed=1))
    mu = coherence(op)
    # S = 1: |<psi_0, psi_rho>|
    assert np.isclose(pseudo_inverse_row_norm(op, SupportSet([(0, 0)], 64), (2, 3)),
                      abs(np.vdot(op.column((0, 0)), op.column((2, 3)))))
    rng = np.random.default_rng(0)
    sup = random_support(64, 4, rng)
    delta = extremal_eigenvalues(gram_submatrix(op, sup)).op_norm_H
    probes = [c for c in rng.choice(64 * 64, 120, replace=False) if c not in set(sup.columns)]
    for c in probes[:100]:
        rho = (int(c) // 64, int(c) % 64)
        assert pseudo_inverse_row_norm(op, sup, rho) <= 2 * mu / (1 - delta) + 1e-10
    with pytest.raises(DomainError):
        pseudo_inverse_row_norm(op, sup, tuple(sup)[0])


def test_pseudo_inverse_orthogonal_atom():
    # atoms sharing a time shift are orthogonal for a unimodular window
    op = GaborOperator(alltop_window(7))
    assert pseudo_inverse_row_norm(op, SupportSet([(2, 0)], 7), (2, 3)) < 1e-12


# ---------------------------------------------------------------- l0 oracle

def test_l0_oracle_atoms_and_zero():
    op = GaborOperator(steinhaus_window(6, seed=7))
    got = l0_oracle(op, op.column((4, 1)))
    assert list(got.support) == [(4, 1)] and np.allclose(got.values, [1])
    assert l0_oracle(op, np.zeros(6)).nnz == 0


def test_l0_oracle_two_sparse_and_guards():
    op = GaborOperator(steinhaus_window(4, seed=1))
    truth = SparseCoeffs(SupportSet([(0, 1), (3, 2)], 4), [1.0, -1j])
    got = l0_oracle(op, op.synthesize(truth))
    assert got.support == truth.support and np.allclose(got.values, truth.values)
    with pytest.raises(NotRepresentableError):
        l0_oracle(op, crandn(np.random.default_rng(0), 4), max_s=1)
    with pytest.raises(DomainError):
        l0_oracle(GaborOperator(steinhaus_window(9, seed=0)), np.ones(9))
    with pytest.raises(DomainError):
        l0_oracle(op, np.ones(4), max_s=3)


def test_l0_oracle_agrees_with_bp():
    op = GaborOperator(steinhaus_window(6, seed=7))
    rng = np.random.default_rng(7)
    truth = SparseCoeffs(random_support(6, 1, rng), np.exp(2j * np.pi * rng.random(1)))
    y = op.synthesize(truth)
    oracle = l0_oracle(op, y)
    assert relative_error(truth, oracle) < 1e-12
    assert verify_recovery(oracle, basis_pursuit(op, y))


# ---------------------------------------------------------------- verification

def test_verify_recovery(rng):
    x = crandn(rng, 16)
    assert verify_recovery(x, x)
    d = crandn(rng, 16)
    assert not verify_recovery(x, x + 2e-5 * np.linalg.norm(x) * d / np.linalg.norm(d))
    assert not verify_recovery(np.zeros(16), d)
    assert verify_recovery(np.zeros(16), np.zeros(16))


def test_sgn_is_exactly_unimodular_or_zero(rng):
    s = sgn(np.r_[crandn(rng, 50), np.zeros(5)])
    mags = np.abs(s)
    assert np.all((np.abs(mags - 1) < 1e-15) | (mags == 0))
