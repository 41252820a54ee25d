"""Quantization maps on the complex plane.

Covers the coherent-state (anti-normal) map, lower symbols, and the
s-parametrized family ``A_f = int f(z) D(z) rho_s D(z)^+ d^2z/pi`` with
``-1 <= s <= 0``.  Phase-space points are ``z = (q + i p)/sqrt(2)`` in
dimensionless units.
"""

from __future__ import annotations

import cmath
import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import gammaln, roots_laguerre

from .fock import FockOperator, PhaseSpaceScales, TruncationWarning, _displacement_laguerre, coherent_vector

__all__ = [
    "Polynomial",
    "RadialAngular",
    "QuadratureRule",
    "QuantizerKernel",
    "PositivityReport",
    "ParseError",
    "cs_quantize_polynomial",
    "cs_quantize_quadrature",
    "lower_symbol",
    "quantizer_kernel",
    "integral_quantize",
    "povm_positivity_check",
    "symplectic_fourier_gaussian",
    "gaussian_weight_route",
    "weighted_displacement_integral",
    "default_rule",
]


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# phase-space functions


@dataclass(frozen=True)
class Polynomial:
    """Finite sum of monomials ``coeff * z**a * conj(z)**b``.

    ``terms`` maps ``(a, b)`` to the coefficient.  Zero coefficients are
    dropped so that two equal polynomials compare equal.
    """

    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (a, b), c in dict(self.terms).items():
            if int(a) != a or int(b) != b or a < 0 or b < 0:
                raise ValueError(f"powers must be non-negative integers, got {(a, b)}")
            c = complex(c)
            if c != 0:
                key = (int(a), int(b))
                clean[key] = clean.get(key, 0) + c
        object.__setattr__(self, "terms", {k: v for k, v in sorted(clean.items()) if v != 0})

    @classmethod
    def monomial(cls, a: int, b: int, coeff: complex = 1.0) -> "Polynomial":
        return cls({(a, b): coeff})

    @classmethod
    def constant(cls, c: complex) -> "Polynomial":
        return cls({(0, 0): c})

    @classmethod
    def position(cls, scales: PhaseSpaceScales | None = None) -> "Polynomial":
        """Classical ``q = ell (z + zbar)/sqrt(2)``."""
        ell = 1.0 if scales is None else scales.ell
        return cls({(1, 0): ell / math.sqrt(2), (0, 1): ell / math.sqrt(2)})

    @classmethod
    def momentum(cls, scales: PhaseSpaceScales | None = None) -> "Polynomial":
        """Classical ``p = wp (z - zbar)/(i sqrt(2))``."""
        wp = 1.0 if scales is None else scales.wp
        return cls({(1, 0): -1j * wp / math.sqrt(2), (0, 1): 1j * wp / math.sqrt(2)})

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        """Parse strings such as ``"z^2 zbar + 0.5"`` or ``"2*z*zbar - (1+2j) z"``."""
        return _parse_polynomial(text)

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self.terms), default=0)

    @property
    def max_harmonic(self) -> int:
        return max((abs(a - b) for a, b in self.terms), default=0)

    @property
    def is_real(self) -> bool:
        for (a, b), c in self.terms.items():
            other = self.terms.get((b, a), 0)
            if abs(c - np.conj(other)) > 1e-14 * (1 + abs(c)):
                return False
        return True

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        zc = np.conj(z)
        for (a, b), c in self.terms.items():
            out = out + c * z ** a * zc ** b
        return out

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, 0) + v
        return Polynomial(merged)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Polynomial) else -complex(other))

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial({k: v * complex(other) for k, v in self.terms.items()})
        out: dict[tuple[int, int], complex] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(1.0)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, z0: complex) -> "Polynomial":
        """The translated polynomial ``z -> f(z - z0)``."""
        z0 = complex(z0)
        zm = Polynomial({(1, 0): 1.0, (0, 0): -z0})
        zbm = Polynomial({(0, 1): 1.0, (0, 0): -z0.conjugate()})
        out = Polynomial()
        for (a, b), c in self.terms.items():
            out = out + c * (zm ** a) * (zbm ** b)
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in self.terms.items():
            mono = " ".join(([f"z^{a}"] if a else []) + ([f"zbar^{b}"] if b else []))
            parts.append(f"({c:g})" + (f" {mono}" if mono else ""))
        return " + ".join(parts)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\((?:[^()]*)\)|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?[jJ]?)
  | (?P<var>zbar|z)(?:\s*\^\s*(?P<pow>\d+))?
  | (?P<op>[-+*])
""", re.VERBOSE)


def _parse_polynomial(text: str) -> Polynomial:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected {text[pos:]!r} in {text!r}")
        pos = m.end()
        if m.lastgroup != "ws":
            tokens.append(m)
    if not tokens:
        raise ParseError("empty polynomial")

    result = Polynomial()
    sign, coeff, a, b, factors = 1.0, 1.0 + 0j, 0, 0, 0
    expect_factor = True  # after an operator a factor must follow
    for tok in tokens:
        op = tok.group("op")
        if op in ("+", "-"):
            if factors:
                result = result + Polynomial.monomial(a, b, sign * coeff)
            elif result.terms or not expect_factor:
                raise ParseError(f"misplaced {op!r} in {text!r}")
            sign = (-1.0 if op == "-" else 1.0) * (sign if not factors and not result.terms else 1.0)
            coeff, a, b, factors = 1.0 + 0j, 0, 0, 0
            expect_factor = True
        elif op == "*":
            if not factors or expect_factor:
                raise ParseError(f"misplaced '*' in {text!r}")
            expect_factor = True
        elif tok.group("num") is not None:
            raw = tok.group("num").strip("()").replace(" ", "")
            try:
                coeff *= complex(raw)
            except ValueError:
                raise ParseError(f"bad number {tok.group('num')!r}") from None
            factors += 1
            expect_factor = False
        else:
            k = int(tok.group("pow") or 1)
            if tok.group("var") == "z":
                a += k
            else:
                b += k
            factors += 1
            expect_factor = False
    if not factors:
        raise ParseError(f"trailing operator in {text!r}")
    return result + Polynomial.monomial(a, b, sign * coeff)


@dataclass(frozen=True)
class RadialAngular:
    """A general symbol given in polar form ``f(r, theta)``.

    ``harmonics`` bounds the angular Fourier content used to size the
    quadrature; ``decay`` is ``"gaussian"`` or ``"polynomial"``.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    harmonics: int = 0
    decay: str = "gaussian"
    real: bool = True

    def __post_init__(self):
        if self.decay not in ("gaussian", "polynomial"):
            raise ValueError("decay must be 'gaussian' or 'polynomial'")

    @classmethod
    def from_z(cls, func, harmonics=0, decay="gaussian", real=True):
        return cls(lambda r, th: func(r * np.exp(1j * th)), harmonics, decay, real)

    @property
    def is_real(self) -> bool:
        return self.real

    @property
    def degree(self) -> int:
        return 0

    @property
    def max_harmonic(self) -> int:
        return self.harmonics

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self.func(np.abs(z), np.angle(z)), dtype=complex)

    def polar(self, r, theta):
        return np.asarray(self.func(r, theta), dtype=complex)


def _polar(f, r, theta):
    if isinstance(f, RadialAngular):
        return f.polar(r, theta)
    return np.asarray(f(r * np.exp(1j * theta)), dtype=complex)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre in ``t = |z|^2`` (weight ``e^{-t}``) times ``angular_count``
    equispaced angles."""

    radial_count: int
    angular_count: int

    def __post_init__(self):
        if self.radial_count < 1 or self.angular_count < 1:
            raise ValueError("quadrature sizes must be >= 1")

    @property
    def radial(self) -> tuple[np.ndarray, np.ndarray]:
        return _laguerre(self.radial_count)

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.angular_count) / self.angular_count


_LAGUERRE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _laguerre(n: int):
    if n not in _LAGUERRE_CACHE:
        x, w = roots_laguerre(n)
        x.setflags(write=False)
        w.setflags(write=False)
        _LAGUERRE_CACHE[n] = (x, w)
    return _LAGUERRE_CACHE[n]


def default_rule(f, n: int, extra: int = 16) -> QuadratureRule:
    """Rule sized so that polynomial symbols are integrated exactly."""
    deg = getattr(f, "degree", 0)
    harm = getattr(f, "max_harmonic", 0)
    return QuadratureRule(n + deg + extra, 2 * (n + harm) + 1)


def _check_rule(f, n, rule):
    need_r = n + getattr(f, "degree", 0)
    need_m = 2 * (n + getattr(f, "max_harmonic", 0))
    notes = []
    if rule.radial_count < need_r or rule.angular_count <= need_m:
        msg = (f"quadrature ({rule.radial_count}, {rule.angular_count}) undersized for N={n}; "
               f"want radial >= {need_r}, angular > {need_m}")
        warnings.warn(msg, TruncationWarning, stacklevel=3)
        notes.append(msg)
    return notes


def _angular_harmonics(f, t: np.ndarray, rule: QuadratureRule, n: int) -> np.ndarray:
    """``F[i, h] = (1/M) sum_j f(sqrt t_i, theta_j) e^{i h theta_j}`` for
    ``h = -(n-1) .. n-1`` (column ``h + n - 1``)."""
    theta = rule.angles
    r = np.sqrt(t)[:, None]
    vals = _polar(f, r, theta[None, :])
    vals = np.broadcast_to(vals, (t.size, theta.size))
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("symbol has non-finite samples")
    h = np.arange(-(n - 1), n)
    phase = np.exp(1j * np.outer(theta, h))
    return vals @ phase / theta.size


def _assemble(radial: np.ndarray, harm: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    # radial[i, m, k] * harm[i, m - k] summed over nodes with weights w
    m = np.arange(n)
    hidx = (m[:, None] - m[None, :]) + (n - 1)
    return np.einsum("i,imk,imk->mk", w, radial, harm[:, hidx])


# ---------------------------------------------------------------------------
# coherent-state quantization


def cs_quantize_polynomial(f: Polynomial, n: int) -> FockOperator:
    """Anti-normal quantization of a polynomial symbol, exact moment rule.

    ``z^a zbar^b`` maps to the matrix with entries ``(m+a)!/sqrt(m! k!)`` at
    ``(m, k)`` whenever ``m + a = k + b``.
    """
    if not isinstance(f, Polynomial):
        raise TypeError("cs_quantize_polynomial needs a Polynomial")
    out = np.zeros((n, n), dtype=complex)
    notes = []
    for (a, b), c in f.terms.items():
        shift = a - b  # column k = m + a - b
        if abs(shift) >= n:
            msg = f"monomial z^{a} zbar^{b} has no entries inside N={n}"
            warnings.warn(msg, TruncationWarning, stacklevel=2)
            notes.append(msg)
            continue
        m = np.arange(max(0, -shift), min(n, n - shift))
        k = m + shift
        vals = np.exp(gammaln(m + a + 1) - 0.5 * gammaln(m + 1) - 0.5 * gammaln(k + 1))
        out[m, k] += c * vals
    return FockOperator(out, hermitian=f.is_real, warnings=tuple(notes))


def _cs_radial(t: np.ndarray, n: int) -> np.ndarray:
    """``t^{(m+k)/2} / sqrt(m! k!)`` on the node grid."""
    m = np.arange(n)
    lt = np.log(t)[:, None] * (0.5 * m)[None, :] - 0.5 * gammaln(m + 1)[None, :]
    v = np.exp(lt)
    return v[:, :, None] * v[:, None, :]


def cs_quantize_quadrature(f, n: int, rule: QuadratureRule | None = None) -> FockOperator:
    """Anti-normal quantization ``int f(z) |z><z| d^2z/pi`` by quadrature."""
    rule = default_rule(f, n) if rule is None else rule
    notes = _check_rule(f, n, rule)
    t, w = rule.radial
    harm = _angular_harmonics(f, t, rule, n)
    out = _assemble(_cs_radial(t, n), harm, w, n)
    herm = bool(getattr(f, "is_real", False))
    if herm:
        out = 0.5 * (out + out.conj().T)
    return FockOperator(out, hermitian=herm, warnings=tuple(notes))


def lower_symbol(a, z: complex) -> complex:
    """Coherent-state expectation ``<z|A|z>`` with the truncated CS vector."""
    m = np.asarray(a, dtype=complex)
    n = m.shape[0]
    z = complex(z)
    if abs(z) ** 2 > n / 4:
        warnings.warn(f"|z|^2 = {abs(z) ** 2:.3g} too large for N={n}", TruncationWarning, stacklevel=2)
    v = coherent_vector(z, n)
    return complex(v.conj() @ m @ v)


# ---------------------------------------------------------------------------
# s-parametrized quantization


@dataclass(frozen=True)
class QuantizerKernel:
    """Seed operator ``rho_s = 2/(1-s) * ((s+1)/(s-1))^{a^+ a}``."""

    s: float
    kernel: FockOperator

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.kernel.matrix))


def _kernel_diagonal(s: float, n: int) -> np.ndarray:
    if not s < 1:
        raise ValueError(f"quantizer kernel needs s < 1, got {s}")
    ratio = (s + 1) / (s - 1)
    k = np.arange(n)
    if ratio == 0:
        d = (k == 0).astype(float)
    else:
        d = np.sign(ratio) ** k * np.abs(ratio) ** k
    return 2 / (1 - s) * d


def quantizer_kernel(s: float, n: int) -> QuantizerKernel:
    d = _kernel_diagonal(float(s), n)
    return QuantizerKernel(float(s), FockOperator(np.diag(d).astype(complex), hermitian=True))


_BIG = 1e150


def _displaced_kernel_radial(t: np.ndarray, s: float, n: int) -> np.ndarray:
    """Radial part of ``e^{u t} <m| D(z) rho_s D(z)^+ |k> / (2/(1-s))``.

    The angular factor is ``e^{i (m-k) theta}``; ``u = 2/(1-s)``.  The
    entries are a scaled Laguerre recurrence that stays well defined from
    ``s = -1`` (rank-one projector) to ``s = 0`` (displaced parity).
    """
    lam = (s + 1) / (s - 1)
    u = 2 / (1 - s)
    nodes = t.size
    alpha = np.arange(n, dtype=float)
    # prefactor (u sqrt t)^alpha / sqrt(alpha!) in log form
    logpre = alpha[None, :] * np.log(u * np.sqrt(t))[:, None] - 0.5 * gammaln(alpha + 1)[None, :]
    out = np.zeros((nodes, n, n))
    prev = np.zeros((nodes, n))
    cur = np.ones((nodes, n))
    scale = np.zeros((nodes, n))
    u2t = (u * u * t)[:, None]
    for k in range(n):
        na = n - k
        val = np.exp(logpre[:, :na] + scale[:, :na]) * cur[:, :na]
        out[:, k + np.arange(na), k] = val
        if k == n - 1:
            break
        nxt = ((lam * (2 * k + alpha + 1) + u2t) * cur
               - lam * lam * math.sqrt(k) * np.sqrt(k + alpha) * prev) / np.sqrt((k + 1) * (k + 1 + alpha))
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            cur = np.where(big, cur / _BIG, cur)
            prev = np.where(big, prev / _BIG, prev)
            scale = scale + big * math.log(_BIG)
    low = np.tril(out, -1)
    return out + np.transpose(low, (0, 2, 1))


def integral_quantize(f, s: float, n: int, rule: QuadratureRule | None = None) -> FockOperator:
    """``int f(z) D(z) rho_s D(z)^+ d^2z/pi`` for ``-1 <= s <= 0``.

    ``s = -1`` is the coherent-state map, ``s = 0`` the Weyl map.  The
    displaced kernel decays like ``exp(-2|z|^2/(1-s))``, and the radial
    Gauss-Laguerre nodes are rescaled to that rate, so polynomial symbols
    are integrated exactly once the rule is large enough.
    """
    s = float(s)
    if not -1.0 <= s <= 0.0:
        raise ValueError(f"integral quantization is supported for -1 <= s <= 0, got s={s}")
    rule = default_rule(f, n) if rule is None else rule
    notes = _check_rule(f, n, rule)
    tau, w = rule.radial
    u = 2 / (1 - s)
    t = tau / u
    harm = _angular_harmonics(f, t, rule, n)
    # the 2/(1-s) kernel normalisation cancels the 1/u Jacobian
    out = _assemble(_displaced_kernel_radial(t, s, n), harm, w, n)
    herm = bool(getattr(f, "is_real", False))
    if herm:
        out = 0.5 * (out + out.conj().T)
    return FockOperator(out, hermitian=herm, warnings=tuple(notes))


@dataclass(frozen=True)
class PositivityReport:
    s: float
    is_positive: bool
    min_eigenvalue: float

    def __iter__(self):
        return iter((self.is_positive, self.min_eigenvalue))


def povm_positivity_check(s: float, n: int = 64) -> PositivityReport:
    """Whether the displaced kernels ``D(z) rho_s D(z)^+`` are positive.

    They are unitary conjugates of ``rho_s``, so its diagonal decides.
    """
    d = _kernel_diagonal(float(s), n)
    lo = float(d.min())
    return PositivityReport(float(s), lo >= -1e-12, lo)


def symplectic_fourier_gaussian(alpha: float, z: complex, amplitude: complex = 1.0) -> complex:
    """Symplectic Fourier transform of ``amplitude * exp(-alpha |xi|^2)`` at ``z``.

    The result is again a Gaussian, ``amplitude/alpha * exp(-|z|^2/alpha)``,
    so the transform can be chained to check it is an involution.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return amplitude / alpha * cmath.exp(-abs(complex(z)) ** 2 / alpha)


def weighted_displacement_integral(s: float, n: int, rule: QuadratureRule | None = None) -> FockOperator:
    """Quadrature of ``int e^{s|z|^2/2} D(z) d^2z/pi`` over the full plane.

    Each node uses the closed-form ``D(z)`` (exact entrywise at any ``|z|``),
    so this is an independent route to the kernel ``rho_s``; ``s = -1``
    gives the Gaussian average ``|e_0><e_0|``.  Needs ``s < 1``.
    """
    s = float(s)
    if not s < 1:
        raise ValueError(f"the weighted integral diverges for s >= 1, got s={s}")
    rule = QuadratureRule(n + 16, 2 * n + 1) if rule is None else rule
    tau, w = rule.radial
    p = (1 - s) / 2
    t = tau / p
    theta = rule.angles
    # D(r e^{i theta})_{mk} = D(r)_{mk} e^{i (m-k) theta}: sum the angles once
    k = np.arange(n)
    ang = np.exp(1j * np.subtract.outer(k, k)[None, :, :] * theta[:, None, None]).mean(axis=0)
    out = np.zeros((n, n), dtype=complex)
    for ti, wi, taui in zip(t, w, tau):
        # e^{tau} e^{s t/2} times the e^{-t/2} inside D equals one
        out += wi * math.exp(taui + 0.5 * s * ti) * _displacement_laguerre(complex(math.sqrt(ti)), n)
    return FockOperator(out * ang / p)


def gaussian_weight_route(alpha: float, s: float, n: int) -> FockOperator:
    """Quantize ``exp(-alpha |z|^2)`` through the weight-function formula.

    With ``varpi_s(z) = e^{s|z|^2/2}`` and the Fourier transform above, the
    integrand is ``e^{s'|z|^2/2} D(z)/alpha`` with ``s' = s - 2/alpha``, whose
    integral is the kernel ``rho_{s'}``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    s_eff = s - 2.0 / alpha
    d = symplectic_fourier_gaussian(alpha, 0.0) * _kernel_diagonal(s_eff, n)
    return FockOperator(np.diag(d.real).astype(complex), hermitian=True)
