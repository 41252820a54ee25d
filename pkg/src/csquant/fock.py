"""Truncated Fock-space operators.

Everything here works on the span of the first ``N`` number states
``|e_0>, ..., |e_{N-1}>``.  Matrices are dense complex ``N x N`` arrays with
row ``m`` / column ``n`` holding ``<e_m|A|e_n>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import gammaln

__all__ = [
    "FockOperator",
    "TruncationSpec",
    "PhaseSpaceScales",
    "TruncationWarning",
    "InvalidDimensionError",
    "ladder_ops",
    "number_op",
    "position_momentum",
    "parity_op",
    "coherent_vector",
    "displacement",
    "hermitian_eigensystem",
    "operator_function",
    "default_guard",
]


class InvalidDimensionError(ValueError):
    pass


class TruncationWarning(UserWarning):
    """Raised (as a warning) when a truncated result is likely inaccurate."""


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the first ``dim`` Fock states.

    ``hermitian`` is a promise made by the constructor; it is checked at
    creation.  ``warnings`` collects truncation diagnostics.
    """

    matrix: np.ndarray
    hermitian: bool = False
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise FloatingPointError("operator has non-finite entries")
        if self.hermitian:
            scale = 1.0 + (np.abs(m).max() if m.size else 0.0)
            if np.abs(m - m.conj().T).max(initial=0.0) > 1e-12 * scale:
                raise ValueError("hermitian flag set on a non-Hermitian matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block(self, n: int) -> np.ndarray:
        """Leading ``n x n`` block."""
        return self.matrix[:n, :n]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def truncate(self, n: int) -> "FockOperator":
        return FockOperator(self.matrix[:n, :n], self.hermitian, self.warnings)


@dataclass(frozen=True)
class TruncationSpec:
    """Working size ``dim`` plus ``guard`` extra levels used during assembly."""

    dim: int
    guard: int | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"dim must be >= 2, got {self.dim}")
        if self.guard is None:
            object.__setattr__(self, "guard", default_guard(self.dim))
        if self.guard < 0:
            raise InvalidDimensionError("guard must be >= 0")

    @property
    def assembly_dim(self) -> int:
        return self.dim + self.guard


def default_guard(n: int) -> int:
    return max(8, n // 8)


@dataclass(frozen=True)
class PhaseSpaceScales:
    """Physical units of the phase space.

    Only ``hbar`` and ``ell`` are stored; the momentum unit ``wp = hbar/ell``
    is derived.  ``mass`` and ``c`` are optional and only needed for the
    Compton length.
    """

    hbar: float = 1.0
    ell: float = 1.0
    mass: float | None = None
    c: float | None = None

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("ell must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def wp(self) -> float:
        return self.hbar / self.ell

    @property
    def compton_length(self) -> float:
        if self.mass is None or self.c is None:
            raise ValueError("Compton length needs both mass and c")
        return self.hbar / (self.mass * self.c)

    def z_of(self, q, p):
        """Complex phase-space label of the point ``(q, p)``."""
        return q / (self.ell * math.sqrt(2)) + 1j * p / (self.wp * math.sqrt(2))

    def qp_of(self, z):
        z = np.asarray(z)
        return math.sqrt(2) * self.ell * z.real, math.sqrt(2) * self.wp * z.imag


def _check_dim(n: int, minimum: int = 2) -> None:
    if int(n) != n or n < minimum:
        raise InvalidDimensionError(f"dimension must be an integer >= {minimum}, got {n}")


def ladder_ops(n: int) -> tuple[FockOperator, FockOperator]:
    """Lowering and raising operators truncated to ``n`` levels."""
    _check_dim(n)
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    return FockOperator(a), FockOperator(a.conj().T.copy())


def number_op(n: int) -> FockOperator:
    _check_dim(n, 1)
    return FockOperator(np.diag(np.arange(n, dtype=complex)), hermitian=True)


def position_momentum(n: int, scales: PhaseSpaceScales,
                      basis_length: float | None = None) -> tuple[FockOperator, FockOperator]:
    """Position ``Q`` and momentum ``P`` in the number basis.

    By default the basis is that of the coherent-state family itself, so
    ``Q = ell/sqrt(2) (a + a^+)``.  ``basis_length`` represents the same
    canonical pair in a ladder basis of a different length scale, which is
    only a change of basis (a squeeze); the operators satisfy
    ``[Q, P] = i hbar`` either way.
    """
    a, ad = ladder_ops(n)
    b = scales.ell if basis_length is None else float(basis_length)
    if not b > 0:
        raise ValueError("basis_length must be positive")
    q = b / math.sqrt(2) * (a.matrix + ad.matrix)
    p = scales.hbar / (1j * b * math.sqrt(2)) * (a.matrix - ad.matrix)
    return FockOperator(q, hermitian=True), FockOperator(p, hermitian=True)


def parity_op(n: int) -> FockOperator:
    _check_dim(n, 1)
    return FockOperator(np.diag((-1.0) ** np.arange(n)).astype(complex), hermitian=True)


def _log_coherent_moduli(t: float, n: int) -> np.ndarray:
    """log of e^{-t/2} |z|^k / sqrt(k!) for k < n (t = |z|^2 > 0)."""
    k = np.arange(n)
    return -0.5 * t + 0.5 * k * math.log(t) - 0.5 * gammaln(k + 1)


def coherent_vector(z: complex, n: int) -> np.ndarray:
    """Number-basis coefficients ``e^{-|z|^2/2} z^k / sqrt(k!)``, ``k < n``."""
    z = complex(z)
    t = abs(z) ** 2
    out = np.zeros(n, dtype=complex)
    if t == 0.0:
        out[0] = 1.0
        return out
    k = np.arange(n)
    return np.exp(_log_coherent_moduli(t, n)) * np.exp(1j * k * np.angle(z))


# rescale the Laguerre recurrence once values leave this window
_BIG = 1e150


def _displacement_laguerre(z: complex, n: int) -> np.ndarray:
    # D[m, k] for m >= k equals e^{-t/2} z^(m-k)/sqrt((m-k)!) * M_k^(m-k)(t) with
    # M the Laguerre polynomial normalised by sqrt(k!/(k+alpha)!) * sqrt(alpha!),
    # run along each sub-diagonal with log-scale bookkeeping.
    t = abs(z) ** 2
    d = np.zeros((n, n), dtype=complex)
    if t == 0.0:
        np.fill_diagonal(d, 1.0)
        return d
    alpha = np.arange(n, dtype=float)
    logc = _log_coherent_moduli(t, n)  # per sub-diagonal alpha
    phase = np.exp(1j * alpha * np.angle(z))
    m_prev = np.zeros(n)
    m_cur = np.ones(n)
    scale = np.zeros(n)  # log of the factor divided out of m_cur/m_prev
    for k in range(n):
        # sub-diagonal alpha holds entry (k + alpha, k) for alpha < n - k
        na = n - k
        val = np.exp(logc[:na] + scale[:na]) * m_cur[:na]
        d[k + np.arange(na), k] = val * phase[:na]
        if k == n - 1:
            break
        a = alpha
        nxt = ((2 * k + a + 1 - t) * m_cur - math.sqrt(k) * np.sqrt(k + a) * m_prev) / np.sqrt(
            (k + 1) * (k + 1 + a))
        m_prev, m_cur = m_cur, nxt
        big = np.abs(m_cur) > _BIG
        if np.any(big):
            m_cur[big] /= _BIG
            m_prev[big] /= _BIG
            scale[big] += math.log(_BIG)
    # upper triangle from D(z)_{mk} = conj(D(-z)_{km})
    lower = np.tril(d, -1)
    sign = (-1.0) ** np.subtract.outer(np.arange(n), np.arange(n))
    upper = (lower * sign).conj().T
    return d + upper


def _displacement_normal_ordered(z: complex, n: int, dps: int) -> np.ndarray:
    # e^{-t/2} exp(z a^+) exp(-conj(z) a): both factors are triangular, so the
    # product of the truncated factors is exact; the sum cancels heavily,
    # hence the extended precision.
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        zc = mpmath.conj(zz)
        fact = [mpmath.factorial(k) for k in range(n)]
        sq = [mpmath.sqrt(f) for f in fact]
        zp = [zz ** k for k in range(n)]
        zm = [(-zc) ** k for k in range(n)]
        # exp(z a^+)[m, k] = z^(m-k) sqrt(m!/k!)/(m-k)! for m >= k
        left = [[zp[m - k] * sq[m] / (sq[k] * fact[m - k]) if m >= k else 0
                 for k in range(n)] for m in range(n)]
        pref = mpmath.exp(-abs(zz) ** 2 / 2)
        out = np.empty((n, n), dtype=complex)
        for m in range(n):
            row = left[m]
            for j in range(n):
                acc = mpmath.mpc(0)
                for k in range(min(m, j) + 1):
                    # exp(-zbar a)[k, j] = (-zbar)^(j-k) sqrt(j!/k!)/(j-k)!
                    acc += row[k] * zm[j - k] * sq[j] / (sq[k] * fact[j - k])
                out[m, j] = complex(acc * pref)
    return out


def displacement(z: complex, n: int, method: str = "laguerre", dps: int | None = None) -> FockOperator:
    """Displacement operator ``D(z) = exp(z a^+ - conj(z) a)`` on ``n`` levels.

    The ``laguerre`` method evaluates the closed-form matrix elements and is
    exact in every entry (up to rounding).  The ``normal-ordered`` method
    multiplies the truncated exponentials of ``a^+`` and ``a`` in extended
    precision; it is slow and intended as a cross-check.
    """
    _check_dim(n, 1)
    z = complex(z)
    if not np.isfinite(z):
        raise FloatingPointError("non-finite displacement amplitude")
    notes = []
    if abs(z) ** 2 > n / 4:
        msg = f"|z|^2 = {abs(z) ** 2:.3g} exceeds N/4 = {n / 4:.3g}; truncated D(z) is unreliable"
        warnings.warn(msg, TruncationWarning, stacklevel=2)
        notes.append(msg)
    if method == "laguerre":
        d = _displacement_laguerre(z, n)
    elif method in ("normal-ordered", "normal_ordered"):
        if dps is None:
            # enough digits to absorb the cancellation in the normal-ordered sum
            dps = 30 + int(2 * abs(z) * math.sqrt(n) / math.log(10))
        d = _displacement_normal_ordered(z, n, dps)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FockOperator(d, warnings=tuple(notes))


def hermitian_eigensystem(a) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    The input is symmetrised first, so tiny anti-Hermitian noise is dropped.
    """
    m = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise FloatingPointError("matrix has non-finite entries")
    m = 0.5 * (m + m.conj().T)
    values, vectors = np.linalg.eigh(m)
    return values, vectors


def operator_function(a, func) -> np.ndarray:
    """``func(A)`` for Hermitian ``A`` by spectral calculus."""
    values, vectors = hermitian_eigensystem(a)
    fv = np.asarray(func(values), dtype=complex)
    return (vectors * fv) @ vectors.conj().T
