"""Time-frequency shifts, windows and the Gabor synthesis operator on C^n.

Conventions used throughout the package:

* translation ``(T_k h)_q = h_{(k+q) mod n}`` and modulation
  ``(M_l h)_q = exp(2 pi i l q / n) h_q``; a time-frequency shift is
  ``pi(k, l) = M_l T_k`` (translate first, then modulate);
* the inner product is linear in the first argument,
  ``<u, v> = sum_q u_q conj(v_q)``;
* coefficient vectors of length ``n**2`` are ordered time-major, i.e. the
  coefficient of ``(k, l)`` sits at position ``k * n + l``. Reshaped to an
  ``(n, n)`` array, row ``k`` holds all frequency shifts of ``T_k g``.

The fast transforms rely on the unnormalized forward DFT
``DFT_l(v) = sum_q v_q exp(-2 pi i l q / n)`` (``numpy.fft.fft``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .exceptions import DomainError, InvalidInputError, ResourceError

__all__ = [
    "TFIndex",
    "Window",
    "SupportSet",
    "SparseCoeffs",
    "GaborOperator",
    "translate",
    "modulate",
    "tf_shift",
    "is_prime",
    "alltop_window",
    "steinhaus_window",
    "custom_window",
    "sgn",
    "DENSE_CAP",
]

DENSE_CAP = 64


def _as_vector(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 1 or h.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-d vector, got shape {h.shape}")
    return h


def translate(h, k: int) -> np.ndarray:
    """Cyclic translation, ``out[q] = h[(k + q) % n]``."""
    h = _as_vector(h)
    return np.roll(h, -(int(k) % h.size))


def modulate(h, l: int) -> np.ndarray:
    """Modulation, ``out[q] = exp(2j*pi*l*q/n) * h[q]``."""
    h = _as_vector(h)
    n = h.size
    q = np.arange(n)
    return np.exp(2j * np.pi * ((int(l) * q) % n) / n) * h


class TFIndex(NamedTuple):
    """A point ``(k, l)`` of the time-frequency plane Z_n x Z_n."""

    k: int
    l: int

    def reduced(self, n: int) -> "TFIndex":
        return TFIndex(int(self.k) % n, int(self.l) % n)

    def column(self, n: int) -> int:
        k, l = self.reduced(n)
        return k * n + l

    @classmethod
    def from_column(cls, j: int, n: int) -> "TFIndex":
        k, l = divmod(int(j), n)
        return cls(k, l)


def tf_shift(h, lam) -> np.ndarray:
    """Apply ``pi(lam) = M_l T_k`` to ``h``."""
    k, l = lam
    return modulate(translate(h, k), l)


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test."""
    n = int(n)
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True, eq=False)
class Window:
    """Generating vector ``g`` of a Gabor system.

    ``kind`` is one of ``"alltop"``, ``"steinhaus"`` or ``"custom"``; ``seed``
    is only meaningful for Steinhaus windows.
    """

    values: np.ndarray
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        values = _as_vector(self.values).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def alltop_window(n: int) -> Window:
    """Alltop window ``g_q = n**-0.5 * exp(2j*pi*q**3/n)`` for prime ``n >= 5``."""
    n = int(n)
    if n < 5 or not is_prime(n):
        raise DomainError(f"the Alltop window needs a prime n >= 5, got n={n}")
    q = np.arange(n, dtype=np.int64)
    # reduce q**3 mod n in integers to keep the phase exact for large n
    phase = (q * q % n) * q % n
    return Window(np.exp(2j * np.pi * phase / n) / np.sqrt(n), kind="alltop")


def steinhaus_window(n: int, seed: int) -> Window:
    """Normalized Steinhaus window with phases drawn from ``default_rng(seed)``.

    Entries are ``n**-0.5 * exp(2j*pi*u_q)`` with ``u_q`` uniform on [0, 1)
    (PCG64 stream). Equal ``(n, seed)`` give bitwise-equal windows.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return Window(np.exp(2j * np.pi * u) / np.sqrt(n), kind="steinhaus", seed=int(seed))


def custom_window(values, normalize: bool = False) -> Window:
    values = _as_vector(values)
    if normalize:
        nrm = np.linalg.norm(values)
        if nrm == 0:
            raise InvalidInputError("cannot normalize the zero window")
        values = values / nrm
    return Window(values, kind="custom")


class SupportSet:
    """Ordered set of distinct time-frequency indices.

    Iteration order is construction order; it fixes the row and column order
    of Gram submatrices and of restricted coefficient vectors.
    """

    __slots__ = ("_indices", "_n", "_columns")

    def __init__(self, indices: Iterable, n: int):
        n = int(n)
        if n < 1:
            raise DomainError(f"n must be positive, got {n}")
        reduced = [TFIndex(*lam).reduced(n) for lam in indices]
        if len(set(reduced)) != len(reduced):
            raise InvalidInputError("support contains duplicate indices")
        self._indices = tuple(reduced)
        self._n = n
        self._columns = np.array([k * n + l for k, l in reduced], dtype=np.intp)
        self._columns.setflags(write=False)

    @classmethod
    def from_columns(cls, columns, n: int) -> "SupportSet":
        return cls((TFIndex.from_column(j, n) for j in np.asarray(columns).ravel()), n)

    @property
    def n(self) -> int:
        return self._n

    @property
    def indices(self) -> tuple:
        return self._indices

    @property
    def columns(self) -> np.ndarray:
        """Flat positions ``k * n + l`` in construction order."""
        return self._columns

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self) -> Iterator[TFIndex]:
        return iter(self._indices)

    def __contains__(self, lam) -> bool:
        return TFIndex(*lam).reduced(self._n) in self._indices

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportSet):
            return NotImplemented
        return self._n == other._n and self._indices == other._indices

    def __hash__(self):
        return hash((self._n, self._indices))

    def __repr__(self) -> str:
        return f"SupportSet({list(map(tuple, self._indices))}, n={self._n})"

    def complement_mask(self) -> np.ndarray:
        """Boolean mask over the ``n**2`` flat positions, True off the support."""
        mask = np.ones(self._n * self._n, dtype=bool)
        mask[self._columns] = False
        return mask


def sgn(x) -> np.ndarray:
    """Complex sign: ``x / |x|`` where ``x != 0`` and 0 elsewhere."""
    x = np.asarray(x, dtype=complex)
    a = np.abs(x)
    out = np.zeros_like(x)
    nz = a > 0
    out[nz] = x[nz] / a[nz]
    return out


@dataclass(frozen=True, eq=False)
class SparseCoeffs:
    """Sparse coefficient vector over Z_n x Z_n; zero values are dropped."""

    support: SupportSet
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.size != len(self.support):
            raise InvalidInputError(
                f"{values.size} values for a support of size {len(self.support)}")
        keep = values != 0
        if not keep.all():
            support = SupportSet(
                (lam for lam, kp in zip(self.support, keep) if kp), self.support.n)
            object.__setattr__(self, "support", support)
            values = values[keep]
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, x, n: int | None = None, threshold: float = 0.0) -> "SparseCoeffs":
        x = np.asarray(x, dtype=complex).ravel()
        if n is None:
            n = int(round(np.sqrt(x.size)))
        if x.size != n * n:
            raise InvalidInputError(f"expected {n * n} coefficients, got {x.size}")
        cols = np.flatnonzero(np.abs(x) > threshold)
        return cls(SupportSet.from_columns(cols, n), x[cols])

    @classmethod
    def zeros(cls, n: int) -> "SparseCoeffs":
        return cls(SupportSet((), n), np.zeros(0, dtype=complex))

    @property
    def n(self) -> int:
        return self.support.n

    @property
    def nnz(self) -> int:
        return len(self.support)

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.n * self.n, dtype=complex)
        x[self.support.columns] = self.values
        return x

    def signs(self) -> np.ndarray:
        """Complex signs of the stored values, in support order."""
        return self.values / np.abs(self.values)


class GaborOperator:
    """Gabor synthesis matrix ``Psi_g`` of size ``n x n**2`` with fast transforms.

    Parameters
    ----------
    window : Window or array_like
        Generating vector ``g``.
    dense_cap : int, optional
        Largest ``n`` for which :meth:`dense_matrix` will materialize the
        matrix.
    """

    def __init__(self, window, dense_cap: int = DENSE_CAP):
        if not isinstance(window, Window):
            window = custom_window(window)
        self.window = window
        self.n = window.n
        self.dense_cap = int(dense_cap)

    @cached_property
    def _shifted(self) -> np.ndarray:
        # _shifted[k, q] = g[(q + k) % n]; built on first fast-transform use
        q = np.arange(self.n)
        return self.window.values[(q[:, None] + q[None, :]) % self.n]

    @cached_property
    def _shifted_conj(self) -> np.ndarray:
        return self._shifted.conj()

    @property
    def shape(self) -> tuple:
        return (self.n, self.n * self.n)

    def __repr__(self) -> str:
        return f"GaborOperator(n={self.n}, window={self.window.kind!r})"

    def _check_signal(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex).ravel()
        if y.size != self.n:
            raise InvalidInputError(f"expected a signal of length {self.n}, got {y.size}")
        return y

    def column(self, lam) -> np.ndarray:
        """The atom ``psi_lam = pi(lam) g``."""
        return tf_shift(self.window.values, lam)

    def columns(self, support) -> np.ndarray:
        """``Psi_Lambda``: the ``n x |Lambda|`` matrix of atoms on ``support``."""
        if not isinstance(support, SupportSet):
            support = SupportSet(support, self.n)
        n = self.n
        if len(support) == 0:
            return np.zeros((n, 0), dtype=complex)
        k = np.array([lam.k for lam in support])
        l = np.array([lam.l for lam in support])
        q = np.arange(n)
        phases = np.exp(2j * np.pi * ((q[:, None] * l[None, :]) % n) / n)
        return phases * self.window.values[(q[:, None] + k[None, :]) % n]

    def synthesize(self, x) -> np.ndarray:
        """Compute ``y = Psi_g x`` for a full or sparse coefficient vector.

        The full path uses ``n`` inverse DFTs of length ``n``: with
        ``u_k = n * ifft(x[k, :])`` one has ``y_q = sum_k g[(q+k) % n] u_k[q]``.
        The sparse path sums ``S`` atoms directly in ``O(S n)``.
        """
        n = self.n
        if isinstance(x, SparseCoeffs):
            if x.n != n:
                raise InvalidInputError(f"coefficients live on Z_{x.n}^2, operator on Z_{n}^2")
            return self.columns(x.support) @ x.values
        x = np.asarray(x, dtype=complex)
        if x.size != n * n:
            raise InvalidInputError(f"expected {n * n} coefficients, got {x.size}")
        u = n * np.fft.ifft(x.reshape(n, n), axis=1)
        return np.einsum("kq,kq->q", self._shifted, u)

    def analyze(self, y) -> np.ndarray:
        """Compute ``Psi_g^* y``, the vector of ``<y, psi_lam>`` in column order."""
        y = self._check_signal(y)
        return np.fft.fft(y[None, :] * self._shifted_conj, axis=1).ravel()

    def dense_matrix(self) -> np.ndarray:
        """Materialize ``Psi_g`` (column ``k*n + l`` is ``tf_shift(g, (k, l))``)."""
        n = self.n
        if n > self.dense_cap:
            raise ResourceError(
                f"dense Gabor matrix for n={n} exceeds the cap n <= {self.dense_cap}")
        q = np.arange(n)
        phases = np.exp(2j * np.pi * ((q[None, :] * q[:, None]) % n) / n)  # [l, q]
        # psi[q, k, l] = phases[l, q] * g[(q + k) % n]
        psi = self._shifted.T[:, :, None] * phases.T[:, None, :]
        return psi.reshape(n, n * n)
