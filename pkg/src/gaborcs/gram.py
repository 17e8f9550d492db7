"""Coherence, Gram submatrices and their extremal eigenvalues.

Eigenvalues of the (small) Hermitian Gram submatrices are computed by a
cyclic complex Jacobi method; ``numpy.linalg`` is only used in tests as an
independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InvalidInputError
from .montecarlo import RateEstimate, derive_seed, parallel_map, trial_rng
from .tfcore import GaborOperator, SupportSet, steinhaus_window

__all__ = [
    "GramSubmatrix",
    "ConditioningReport",
    "coherence",
    "gram_submatrix",
    "jacobi_eigenvalues",
    "extremal_eigenvalues",
    "random_support",
    "conditioning_trial",
    "conditioning_failure_rate",
    "trace_power_mean",
]


def coherence(op: GaborOperator) -> float:
    """Largest ``|<psi_lam', psi_lam>|`` over distinct columns.

    Inner products of time-frequency shifts only depend on the difference
    of the indices up to a unimodular factor, so it suffices to take the
    maximum of ``|<g, pi(k, l) g>|`` over ``(k, l) != (0, 0)``, which is one
    call to :meth:`GaborOperator.analyze`.
    """
    if op.n < 2:
        raise DomainError("coherence needs n >= 2")
    g = op.window.values
    corr = np.abs(op.analyze(g))
    norm2 = float(np.vdot(g, g).real)
    return float(corr[1:].max() / norm2)


@dataclass(frozen=True, eq=False)
class GramSubmatrix:
    """``Psi_Lambda^* Psi_Lambda`` together with its support."""

    entries: np.ndarray
    support: SupportSet

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def deviation(self) -> np.ndarray:
        """``H = Psi_Lambda^* Psi_Lambda - I``."""
        return self.entries - np.eye(self.size)


@dataclass(frozen=True)
class ConditioningReport:
    lambda_min: float
    lambda_max: float
    op_norm_H: float
    frobenius_H: float


def gram_submatrix(op: GaborOperator, support) -> GramSubmatrix:
    """Gram matrix with entry ``(i, j) = <psi_j, psi_i>``."""
    if not isinstance(support, SupportSet):
        support = SupportSet(support, op.n)
    if len(support) == 0:
        raise DomainError("Gram submatrix of an empty support")
    cols = op.columns(support)
    return GramSubmatrix(cols.conj().T @ cols, support)


def _check_hermitian(a: np.ndarray, tol: float) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * scale:
        raise InvalidInputError("matrix is not Hermitian within tolerance")


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then applies the real plane rotation that annihilates
    it. Sweeps stop once the off-diagonal Frobenius norm is below
    ``tol * max(1, ||a||_F)``.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    sweeps : int
        Number of completed sweeps.
    """
    a = np.array(a, dtype=complex)
    _check_hermitian(a, 1e-10)
    a = 0.5 * (a + a.conj().T)
    m = a.shape[0]
    target = tol * max(1.0, float(np.linalg.norm(a)))
    sweeps = 0
    while sweeps < max_sweeps:
        off = math.sqrt(max(0.0, float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))))
        if off <= target:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * math.atan2(2.0 * r, aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                e = apq / r
                # J acts on the (p, q) coordinates: J = diag(1, conj(e)) @ [[c, s], [-s, c]]
                j = np.array([[c, s], [-s * e.conjugate(), c * e.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
        sweeps += 1
    return np.sort(np.diag(a).real), sweeps


def extremal_eigenvalues(m) -> ConditioningReport:
    """Extremal eigenvalues of ``Psi_Lambda^* Psi_Lambda`` and norms of ``H``."""
    entries = m.entries if isinstance(m, GramSubmatrix) else np.asarray(m, dtype=complex)
    w, _ = jacobi_eigenvalues(entries)
    lmin, lmax = float(w[0]), float(w[-1])
    h = entries - np.eye(entries.shape[0])
    return ConditioningReport(
        lambda_min=lmin,
        lambda_max=lmax,
        op_norm_H=max(abs(lmin - 1.0), abs(lmax - 1.0)),
        frobenius_H=float(np.linalg.norm(h)),
    )


def random_support(n: int, size: int, rng: np.random.Generator) -> SupportSet:
    """Uniform size-``size`` subset of Z_n x Z_n, drawn without replacement."""
    if not 0 <= size <= n * n:
        raise DomainError(f"support size must lie in [0, {n * n}], got {size}")
    cols = rng.choice(n * n, size=size, replace=False)
    return SupportSet.from_columns(cols, n)


def conditioning_trial(n: int, S: int, master_seed: int, trial_index: int,
                       support=None) -> ConditioningReport:
    """One draw: fresh Steinhaus window and (unless given) a uniform support."""
    window = steinhaus_window(n, derive_seed(master_seed, trial_index, "window"))
    if support is None:
        support = random_support(n, S, trial_rng(master_seed, trial_index, "support"))
    return extremal_eigenvalues(gram_submatrix(GaborOperator(window), support))


def conditioning_failure_rate(n: int, S: int, delta: float, trials: int,
                              master_seed: int, support=None,
                              threads: int | None = None) -> RateEstimate:
    """Fraction of draws with ``||Psi_Lambda^* Psi_Lambda - I|| > delta``.

    The returned :class:`RateEstimate` converts to ``float`` as the rate and
    also carries the 95% Wilson interval.
    """
    if not 1 <= S <= n * n:
        raise DomainError(f"S must lie in [1, {n * n}], got {S}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if trials < 1:
        raise DomainError("trials must be positive")
    reports = parallel_map(
        lambda t: conditioning_trial(n, S, master_seed, t, support), range(trials), threads)
    failures = sum(r.op_norm_H > delta for r in reports)
    return RateEstimate.from_counts(failures, trials)


def trace_power_mean(n: int, S: int, power: int, draws: int, master_seed: int,
                     support=None, threads: int | None = None) -> float:
    """Monte-Carlo mean of ``Tr H**power`` over Steinhaus windows.

    A fixed ``support`` may be given; otherwise each draw samples a uniform
    one.
    """

    def one(t):
        window = steinhaus_window(n, derive_seed(master_seed, t, "window"))
        sup = support
        if sup is None:
            sup = random_support(n, S, trial_rng(master_seed, t, "support"))
        h = gram_submatrix(GaborOperator(window), sup).deviation()
        return float(np.trace(np.linalg.matrix_power(h, power)).real)

    return float(np.mean(parallel_map(one, range(draws), threads)))
