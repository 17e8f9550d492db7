"""Basis Pursuit over complex Gabor coefficients and recovery certificates.

The solver is a first-order primal-dual iteration for::

    minimize ||x||_1   subject to   Psi x = y

written as ``min_x G(x) + F(Psi x)`` with ``G = ||.||_1`` and ``F`` the
indicator of ``{y}``. Each iteration needs one synthesis and one analysis
with the fast transforms of :class:`~gaborcs.tfcore.GaborOperator`. Because
``Psi Psi^* = n I`` for unit-norm windows, ``||Psi|| = sqrt(n)`` and the
step sizes need no power iteration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import (CertificateUnavailableError, DomainError, InvalidInputError,
                         NotRepresentableError)
from .gram import ConditioningReport, extremal_eigenvalues, gram_submatrix
from .tfcore import GaborOperator, SparseCoeffs, SupportSet, TFIndex

__all__ = [
    "BPConfig",
    "BPResult",
    "CertificateReport",
    "soft_threshold",
    "basis_pursuit",
    "dual_certificate",
    "certificate_vector",
    "pseudo_inverse_row_norm",
    "l0_oracle",
    "relative_error",
    "verify_recovery",
    "recovered_support",
]


@dataclass(frozen=True)
class BPConfig:
    """Solver settings. ``None`` steps resolve to ``0.99 / sqrt(n)``."""

    max_iterations: int = 20000
    primal_step: float | None = None
    dual_step: float | None = None
    convergence_tol: float = 1e-9
    recovery_tol: float = 1e-5
    check_every: int = 10

    def __post_init__(self):
        if self.convergence_tol <= 0 or self.recovery_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_iterations < 1 or self.check_every < 1:
            raise DomainError("max_iterations and check_every must be positive")

    def steps(self, n: int) -> tuple[float, float]:
        tau = self.primal_step if self.primal_step is not None else 0.99 / math.sqrt(n)
        sigma = self.dual_step if self.dual_step is not None else 0.99 / math.sqrt(n)
        if tau <= 0 or sigma <= 0:
            raise DomainError("step sizes must be positive")
        if tau * sigma * n > 1.0 + 1e-12:
            raise DomainError(
                f"primal_step * dual_step * ||Psi||^2 = {tau * sigma * n:.4g} exceeds 1")
        return tau, sigma


@dataclass(frozen=True, eq=False)
class BPResult:
    coefficients: np.ndarray
    residual: float
    l1_value: float
    iterations: int
    converged: bool
    gap: float = math.nan

    def sparse(self, threshold: float = 0.0) -> SparseCoeffs:
        return SparseCoeffs.from_dense(self.coefficients, threshold=threshold)


@dataclass(frozen=True)
class CertificateReport:
    max_offsupport_magnitude: float
    gram_condition: ConditioningReport
    certifies_uniqueness: bool
    per_index: dict | None = None


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Complex soft threshold ``v * max(1 - tau/|v|, 0)``."""
    a = np.abs(v)
    scale = np.maximum(1.0 - tau / np.maximum(a, np.finfo(float).tiny), 0.0)
    return v * scale


def basis_pursuit(op: GaborOperator, y, config: BPConfig | None = None, x0=None) -> BPResult:
    """Approximate ``argmin ||x||_1`` subject to ``Psi x = y``.

    Parameters
    ----------
    op : GaborOperator
        Measurement operator.
    y : array_like
        Signal of length ``n``.
    config : BPConfig, optional
        Iteration limits, steps and tolerances.
    x0 : array_like, optional
        Starting coefficients (length ``n**2``); zero by default.

    Returns
    -------
    BPResult
        ``converged`` is True once the relative residual and the relative
        change of the iterate both drop below ``config.convergence_tol``.
        Running out of iterations is reported, not raised.
    """
    config = config or BPConfig()
    n = op.n
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != n:
        raise InvalidInputError(f"expected a signal of length {n}, got {y.size}")
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return BPResult(np.zeros(n * n, dtype=complex), 0.0, 0.0, 0, True, 0.0)

    tau, sigma = config.steps(n)
    tol = config.convergence_tol
    x = np.zeros(n * n, dtype=complex) if x0 is None else np.array(x0, dtype=complex).ravel()
    if x.size != n * n:
        raise InvalidInputError(f"x0 must have {n * n} entries, got {x.size}")
    xbar = x.copy()
    p = np.zeros(n, dtype=complex)
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        p += sigma * (op.synthesize(xbar) - y)
        x_new = soft_threshold(x - tau * op.analyze(p), tau)
        np.subtract(2.0 * x_new, x, out=xbar)
        if it % config.check_every == 0:
            step = float(np.linalg.norm(x_new - x))
            x = x_new
            res = float(np.linalg.norm(op.synthesize(x) - y)) / ynorm
            if res <= tol and step <= tol * max(float(np.linalg.norm(x)), 1e-300):
                converged = True
                break
        else:
            x = x_new

    residual = float(np.linalg.norm(op.synthesize(x) - y)) / ynorm
    l1 = float(np.abs(x).sum())
    # dual point rescaled into {||Psi^* p||_inf <= 1}; dual value is -Re<p, y>
    scale = max(1.0, float(np.abs(op.analyze(p)).max()))
    dual = -float(np.vdot(p / scale, y).real)
    return BPResult(x, residual, l1, it, converged, l1 - dual)


def _restricted_setup(op: GaborOperator, support):
    if not isinstance(support, SupportSet):
        support = SupportSet(support, op.n)
    if len(support) == 0:
        raise DomainError("empty support")
    gram = gram_submatrix(op, support)
    cond = extremal_eigenvalues(gram)
    if cond.lambda_min <= 1e-10:
        raise CertificateUnavailableError(
            f"Gram submatrix is singular (lambda_min = {cond.lambda_min:.3g})")
    return support, gram, cond


def dual_certificate(op: GaborOperator, support, signs, per_index: bool = False
                     ) -> CertificateReport:
    """Evaluate ``P = Psi^* Psi_L (Psi_L^* Psi_L)^-1 sgn`` off the support.

    ``sup_{rho not in L} |P_rho| < 1`` together with an invertible Gram
    matrix certifies that any ``x`` supported on ``L`` with these signs is
    the unique Basis Pursuit solution for ``y = Psi x``.
    """
    support, gram, cond = _restricted_setup(op, support)
    signs = np.asarray(signs, dtype=complex).ravel()
    if signs.size != len(support):
        raise InvalidInputError(f"{signs.size} signs for a support of size {len(support)}")
    if np.abs(np.abs(signs) - 1.0).max() > 1e-10:
        raise InvalidInputError("signs must have unit modulus")
    v = linalg.solve(gram.entries, signs, assume_a="her")
    P = op.analyze(op.columns(support) @ v)
    off = support.complement_mask()
    mags = np.abs(P)
    top = float(mags[off].max()) if off.any() else 0.0
    detail = None
    if per_index:
        n = op.n
        detail = {TFIndex.from_column(j, n): float(mags[j]) for j in np.flatnonzero(off)}
    return CertificateReport(
        max_offsupport_magnitude=top,
        gram_condition=cond,
        certifies_uniqueness=bool(top < 1.0 and cond.lambda_min > 0.0),
        per_index=detail,
    )


def certificate_vector(op: GaborOperator, support, signs) -> np.ndarray:
    """The full vector ``P`` (length ``n**2``) behind :func:`dual_certificate`."""
    support, gram, _ = _restricted_setup(op, support)
    v = linalg.solve(gram.entries, np.asarray(signs, dtype=complex), assume_a="her")
    return op.analyze(op.columns(support) @ v)


def pseudo_inverse_row_norm(op: GaborOperator, support, rho) -> float:
    """``||pinv(Psi_L) psi_rho||_2 = ||(Psi_L^* Psi_L)^-1 Psi_L^* psi_rho||_2``."""
    support, gram, _ = _restricted_setup(op, support)
    if rho in support:
        raise DomainError(f"rho={tuple(rho)} lies in the support")
    b = op.columns(support).conj().T @ op.column(rho)
    return float(np.linalg.norm(linalg.solve(gram.entries, b, assume_a="her")))


def l0_oracle(op: GaborOperator, y, max_s: int = 2) -> SparseCoeffs:
    """Sparsest exact representation by exhaustive search (tiny ``n`` only).

    Supports are tried by size and, within a size, in lexicographic column
    order; the first least-squares fit with residual at most
    ``1e-8 ||y||`` wins.
    """
    n = op.n
    if n > 8 or max_s > 2:
        raise DomainError(f"exhaustive search is limited to n <= 8, max_s <= 2 (got {n}, {max_s})")
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != n:
        raise InvalidInputError(f"expected a signal of length {n}, got {y.size}")
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return SparseCoeffs.zeros(n)
    psi = op.dense_matrix()
    for size in range(1, max_s + 1):
        for cols in itertools.combinations(range(n * n), size):
            a = psi[:, cols]
            c, *_ = np.linalg.lstsq(a, y, rcond=None)
            if np.linalg.norm(a @ c - y) <= 1e-8 * ynorm:
                return SparseCoeffs(SupportSet.from_columns(cols, n), c)
    raise NotRepresentableError(f"no exact representation with at most {max_s} atoms")


def _dense(x) -> np.ndarray:
    if isinstance(x, SparseCoeffs):
        return x.to_dense()
    if isinstance(x, BPResult):
        return x.coefficients
    return np.asarray(x, dtype=complex).ravel()


def relative_error(truth, result) -> float:
    t, r = _dense(truth), _dense(result)
    if t.size != r.size:
        raise InvalidInputError(f"length mismatch: {t.size} vs {r.size}")
    tn = float(np.linalg.norm(t))
    diff = float(np.linalg.norm(r - t))
    if tn == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / tn


def verify_recovery(truth, result, tol: float = 1e-5) -> bool:
    """True iff ``||x_result - x_truth|| <= tol ||x_truth||``."""
    return relative_error(truth, result) <= tol


def recovered_support(truth, result, tol: float = 1e-5) -> SupportSet:
    """Entries of ``result`` above ``tol ||x_truth|| / sqrt(S)`` in magnitude."""
    t = _dense(truth)
    r = _dense(result)
    n = int(round(math.sqrt(t.size)))
    S = max(1, int(np.count_nonzero(t)))
    thresh = tol * float(np.linalg.norm(t)) / math.sqrt(S)
    return SupportSet.from_columns(np.flatnonzero(np.abs(r) > thresh), n)
