"""Gaussian-convolution quantizers for functions of q or p, and Hamiltonians.

Quantizing ``f(q)`` with coherent states gives ``f~(Q)`` where ``f~`` is ``f``
averaged against the normalised Gaussian ``exp(-x^2/ell^2)/sqrt(pi ell^2)``.
Functions of ``p`` are smoothed the same way at the momentum scale
``wp = hbar/ell``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import constants as sc
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import erf, gamma, roots_hermite

from .fock import (
    FockOperator,
    PhaseSpaceScales,
    TruncationSpec,
    hermitian_eigensystem,
    position_momentum,
)

__all__ = [
    "Potential1D",
    "Harmonic",
    "GaussianWell",
    "Morse",
    "PowerLaw",
    "InverseSqrt",
    "Step",
    "Tabulated",
    "Polynomial1D",
    "HamiltonianSpec",
    "ConfigurationError",
    "SmoothingDomainError",
    "ResidualReport",
    "gaussian_smooth",
    "operator_of_position_function",
    "operator_of_momentum_function",
    "quantize_mixed",
    "semiclassical_residual",
    "build_hamiltonian",
    "build_canonical_hamiltonian",
    "compton_scales",
    "natural_length",
]


class SmoothingDomainError(ValueError):
    """The function is not integrable against the Gaussian."""


class ConfigurationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# potentials


class Potential1D:
    """Base class: a real function of one variable.

    Subclasses provide ``__call__`` and, where known, ``second_derivative``
    and the closed-form smoothing ``smoothed(x, ell)``.
    """

    smoothness = "analytic"
    e_offset = 0.0

    def __call__(self, x):
        raise NotImplementedError

    def second_derivative(self, x):
        raise NotImplementedError(f"{type(self).__name__} has no second derivative")

    def smoothed(self, x, ell):
        return None

    def curvature_at_minimum(self) -> float | None:
        return None


@dataclass(frozen=True)
class Harmonic(Potential1D):
    """``k q^2 / 2``."""

    k: float

    @classmethod
    def from_mass_frequency(cls, m, omega):
        return cls(m * omega ** 2)

    def __call__(self, x):
        return 0.5 * self.k * np.asarray(x, dtype=float) ** 2

    def second_derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.k)

    def smoothed(self, x, ell):
        return 0.5 * self.k * (np.asarray(x, dtype=float) ** 2 + 0.5 * ell ** 2)

    def curvature_at_minimum(self):
        return self.k


@dataclass(frozen=True)
class GaussianWell(Potential1D):
    """``-depth * exp(-q^2/width^2)``."""

    depth: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return -self.depth * np.exp(-(x / self.width) ** 2)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        w2 = self.width ** 2
        return -self.depth * np.exp(-x ** 2 / w2) * (4 * x ** 2 / w2 ** 2 - 2 / w2)

    def smoothed(self, x, ell):
        x = np.asarray(x, dtype=float)
        s2 = self.width ** 2 + ell ** 2
        return -self.depth * self.width / math.sqrt(s2) * np.exp(-x ** 2 / s2)

    def curvature_at_minimum(self):
        return 2 * self.depth / self.width ** 2


@dataclass(frozen=True)
class Morse(Potential1D):
    """``D_e (1 - exp(-alpha q))^2``."""

    d_e: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.d_e * (1 - np.exp(-self.alpha * x)) ** 2

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        e = np.exp(-self.alpha * x)
        return self.d_e * self.alpha ** 2 * (4 * e * e - 2 * e)

    def smoothed(self, x, ell):
        # Gaussian average of exp(-b q) is exp(-b q + b^2 ell^2/4)
        x = np.asarray(x, dtype=float)
        a, l2 = self.alpha, ell ** 2
        return self.d_e * (1 - 2 * np.exp(-a * x + a * a * l2 / 4) + np.exp(-2 * a * x + a * a * l2))

    def curvature_at_minimum(self):
        return 2 * self.d_e * self.alpha ** 2


@dataclass(frozen=True)
class PowerLaw(Potential1D):
    """``strength * |q|^(-exponent)``; integrable against the Gaussian iff exponent < 1."""

    strength: float
    exponent: float
    smoothness = "singular"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return self.strength * np.abs(x) ** (-self.exponent)

    def second_derivative(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        p = self.exponent
        with np.errstate(divide="ignore"):
            return self.strength * p * (p + 1) * x ** (-p - 2)

    def smoothed(self, x, ell):
        if self.exponent >= 1:
            raise SmoothingDomainError(
                f"|q|^-{self.exponent} is not integrable against a Gaussian at the singularity")
        return np.vectorize(lambda q: _smooth_power_law(self.strength, self.exponent, q, ell))(x)


def InverseSqrt(strength: float = 1.0) -> PowerLaw:
    """``strength / sqrt(|q|)``."""
    return PowerLaw(strength, 0.5)


def _smooth_power_law(strength, p, q, ell):
    # substitute y = q - x = +-t^(1/(1-p)) to remove the |y|^-p singularity
    k = 1.0 / (1.0 - p)

    def integrand(t, sgn):
        y = sgn * t ** k
        return math.exp(-((q - y) / ell) ** 2) * k

    total = 0.0
    for sgn in (1.0, -1.0):
        val, _ = quad(integrand, 0, np.inf, args=(sgn,), epsabs=0, epsrel=1e-13, limit=400)
        total += val
    return strength * total / (math.sqrt(math.pi) * ell)


@dataclass(frozen=True)
class Step(Potential1D):
    """``height`` for ``q > edge``, zero below."""

    height: float
    edge: float = 0.0
    smoothness = "discontinuous"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.edge, self.height, 0.0)

    def smoothed(self, x, ell):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.height * (1 + erf((x - self.edge) / ell))


@dataclass(frozen=True)
class Polynomial1D(Potential1D):
    """``sum c_k q^k`` with ``coeffs[k] = c_k``.  Smoothing is exact."""

    coeffs: tuple[float, ...]

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    def second_derivative(self, x):
        d2 = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), d2)

    def smoothed(self, x, ell):
        # Gaussian moments E[y^{2j}] = (2j-1)!! (ell^2/2)^j
        c = np.asarray(self.coeffs, dtype=float)
        out = np.zeros(len(c))
        for k, ck in enumerate(c):
            for j in range(0, k // 2 + 1):
                mom = _double_factorial(2 * j - 1) * (ell ** 2 / 2) ** j
                out[k - 2 * j] += ck * math.comb(k, 2 * j) * mom
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), out)


def _double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@dataclass(frozen=True)
class Tabulated(Potential1D):
    """Cubic-spline interpolant of sampled values, held constant outside the grid."""

    grid: tuple[float, ...]
    values: tuple[float, ...]
    smoothness = "tabulated"
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 4:
            raise ValueError("grid and values must be 1-D of equal length >= 4")
        if np.any(np.diff(g) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")
        object.__setattr__(self, "_spline", CubicSpline(g, v))

    def __call__(self, x):
        g = self.grid
        x = np.clip(np.asarray(x, dtype=float), g[0], g[-1])
        return self._spline(x)

    def second_derivative(self, x):
        g = self.grid
        x = np.asarray(x, dtype=float)
        inside = (x >= g[0]) & (x <= g[-1])
        return np.where(inside, self._spline(np.clip(x, g[0], g[-1]), 2), 0.0)

    def interpolation_error(self) -> float:
        """Max deviation at the odd samples of a spline through the even ones."""
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        if g.size < 8:
            return float("nan")
        coarse = CubicSpline(g[::2], v[::2])
        odd = g[1:-1:2]
        return float(np.max(np.abs(coarse(odd) - v[1:-1:2])))


# ---------------------------------------------------------------------------
# smoothing


def _hermite_smooth(f, x, ell, nodes):
    t, w = roots_hermite(nodes)
    x = np.asarray(x, dtype=float)
    vals = np.asarray(f(x[..., None] - ell * t), dtype=float)
    return vals @ w / math.sqrt(math.pi)


def gaussian_smooth(f, ell: float, rtol: float = 1e-12) -> Callable[[np.ndarray], np.ndarray]:
    """Return ``f~(q) = int f(q - x) exp(-x^2/ell^2) dx / sqrt(pi ell^2)``.

    Closed forms are used for the named potentials; anything else is
    integrated by Gauss-Hermite quadrature with the node count doubled until
    two successive estimates agree to ``rtol``.  The nodes are spread over a
    few ``ell``, so callables with structure much narrower than ``ell/2`` can
    alias; wrap such functions in a :class:`Tabulated` grid instead.
    """
    if not ell > 0:
        raise ValueError("ell must be positive")
    if isinstance(f, Potential1D):
        probe = f.smoothed(np.zeros(1), ell)  # raises for non-integrable cases
        if probe is not None:
            return lambda x: f.smoothed(x, ell)
        if isinstance(f, Tabulated):
            return _tabulated_smoother(f, ell)

    def smoothed(x):
        x = np.asarray(x, dtype=float)
        prev = _hermite_smooth(f, x, ell, 32)
        for nodes in (64, 128, 256):
            cur = _hermite_smooth(f, x, ell, nodes)
            if np.all(np.abs(cur - prev) <= rtol * (1 + np.abs(cur))):
                return cur
            prev = cur
        return np.vectorize(lambda q: quad(lambda y: f(q - y) * math.exp(-(y / ell) ** 2),
                                           -np.inf, np.inf, epsrel=1e-12, limit=400)[0]
                            / math.sqrt(math.pi) / ell)(x)

    return smoothed


def _tabulated_smoother(f: Tabulated, ell):
    g = np.asarray(f.grid)

    def smoothed(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        for i, q in enumerate(x.ravel()):
            # piecewise: quad over each spline interval, constant tails outside
            lo, hi = g[0], g[-1]
            inner, _ = quad(lambda y: f(y) * math.exp(-((q - y) / ell) ** 2), lo, hi,
                            points=g[(g > lo) & (g < hi)][:: max(1, g.size // 40)], limit=2000,
                            epsrel=1e-11)
            left = f.values[0] * 0.5 * (1 + erf((lo - q) / ell)) * math.sqrt(math.pi) * ell
            right = f.values[-1] * 0.5 * (1 - erf((hi - q) / ell)) * math.sqrt(math.pi) * ell
            out.ravel()[i] = (inner + left + right) / (math.sqrt(math.pi) * ell)
        return out

    return smoothed


# ---------------------------------------------------------------------------
# operators


def _assembly(n, guard):
    # spectral calculus on a truncated Q is only trustworthy well inside the
    # basis, so functions of Q or P are assembled at twice the size by default
    spec = TruncationSpec(n, n if guard is None else guard)
    return spec.assembly_dim


def operator_of_position_function(f, n: int, scales: PhaseSpaceScales, *, basis_length=None,
                                  guard: int | None = None, smooth: bool = True) -> FockOperator:
    """``f~(Q)`` by spectral calculus on ``Q`` assembled at ``n + guard``.

    With ``smooth=False`` the unsmoothed ``f(Q)`` of canonical quantization
    is returned instead.
    """
    big = _assembly(n, guard)
    q, _ = position_momentum(big, scales, basis_length)
    func = gaussian_smooth(f, scales.ell) if smooth else f
    vals, vecs = hermitian_eigensystem(q.matrix)
    fv = np.asarray(func(vals), dtype=float)
    m = (vecs * fv) @ vecs.conj().T
    m = 0.5 * (m + m.conj().T)
    return FockOperator(m[:n, :n], hermitian=True)


def operator_of_momentum_function(f, n: int, scales: PhaseSpaceScales, *, basis_length=None,
                                  guard: int | None = None, smooth: bool = True) -> FockOperator:
    """``f~(P)`` with smoothing at the momentum scale ``hbar/ell``."""
    big = _assembly(n, guard)
    _, p = position_momentum(big, scales, basis_length)
    func = gaussian_smooth(f, scales.wp) if smooth else f
    vals, vecs = hermitian_eigensystem(p.matrix)
    fv = np.asarray(func(vals), dtype=float)
    m = (vecs * fv) @ vecs.conj().T
    m = 0.5 * (m + m.conj().T)
    return FockOperator(m[:n, :n], hermitian=True)


def quantize_mixed(f, which: str, n: int, scales: PhaseSpaceScales, *, basis_length=None,
                   guard: int | None = None) -> FockOperator:
    """``p f(q) -> (P f~(Q) + f~(Q) P)/2`` or ``q f(p) -> (Q f~(P) + f~(P) Q)/2``."""
    big = _assembly(n, guard)
    q, p = position_momentum(big, scales, basis_length)
    if which in ("p*f(q)", "pf(q)", "p"):
        g = operator_of_position_function(f, big, scales, basis_length=basis_length, guard=0).matrix
        x = p.matrix
    elif which in ("q*f(p)", "qf(p)", "q"):
        g = operator_of_momentum_function(f, big, scales, basis_length=basis_length, guard=0).matrix
        x = q.matrix
    else:
        raise ValueError(f"which must be 'p*f(q)' or 'q*f(p)', got {which!r}")
    m = 0.5 * (x @ g + g @ x)
    # only the product's last row/column sees the missing levels
    return FockOperator(m[:n, :n], hermitian=True)


@dataclass(frozen=True)
class ResidualReport:
    """Darwin-type expansion check ``sup |f~ - f - ell^2/4 f''|``.

    ``ratios[i] = residuals[i]/residuals[i+1]`` for successive halvings of ell.
    """

    ells: tuple[float, ...]
    residuals: tuple[float, ...]
    ratios: tuple[float, ...]
    valid: bool
    reason: str = ""


def semiclassical_residual(f, ell: float, grid=None, halvings: int = 0) -> ResidualReport:
    """Residual of the second-order expansion of the smoothing, optionally
    repeated at ``ell/2, ell/4, ...``.  ``valid`` is false when the expansion
    does not apply (non-smooth ``f``)."""
    ells = tuple(ell / 2 ** i for i in range(halvings + 1))
    smoothness = getattr(f, "smoothness", "analytic")
    if smoothness in ("discontinuous", "singular"):
        return ResidualReport(ells, (), (), False,
                              f"{type(f).__name__} is {smoothness}; the expansion does not hold")
    if grid is None:
        width = getattr(f, "width", None) or (1 / getattr(f, "alpha", 1.0))
        grid = np.linspace(-4 * width, 4 * width, 801)
    grid = np.asarray(grid, dtype=float)
    try:
        d2 = f.second_derivative(grid)
    except NotImplementedError as exc:
        return ResidualReport(ells, (), (), False, str(exc))
    base = f(grid)
    res = []
    for e in ells:
        smooth = gaussian_smooth(f, e)(grid)
        res.append(float(np.max(np.abs(smooth - base - e * e / 4 * d2))))
    ratios = tuple(res[i] / res[i + 1] if res[i + 1] > 0 else math.inf for i in range(len(res) - 1))
    return ResidualReport(ells, tuple(res), ratios, True)


# ---------------------------------------------------------------------------
# Hamiltonians


def compton_scales(m: float, c: float, hbar: float = sc.hbar) -> PhaseSpaceScales:
    """Scales with ``ell`` equal to half the reduced Compton length ``hbar/(m c)``."""
    if not (m > 0 and c > 0):
        raise ValueError("mass and speed of light must be positive")
    return PhaseSpaceScales(hbar=hbar, ell=hbar / (2 * m * c), mass=m, c=c)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Inputs for ``H = (P - e A~)^2/2m + V~ + e^2/2m ((A^2)~ - A~^2) + m c^2 + E0``."""

    mass: float
    scales: PhaseSpaceScales
    potential: Potential1D | Callable | None = None
    vector_potential: Potential1D | Callable | None = None
    charge: float = 1.0
    classical_proper_energy: float = 0.0
    include_rest_mass: bool = True

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigurationError("mass must be positive")
        if self.include_rest_mass:
            s = self.scales
            if s.c is None:
                raise ConfigurationError("include_rest_mass needs the speed of light in the scales")
            target = s.hbar / (2 * self.mass * s.c)
            if abs(s.ell - target) > 1e-12 * target:
                raise ConfigurationError(
                    f"include_rest_mass requires ell = hbar/(2 m c) = {target:.6g}, got {s.ell:.6g}")

    @property
    def rest_energy(self) -> float:
        return self.mass * self.scales.c ** 2 if self.include_rest_mass else 0.0


def natural_length(potential, mass: float, hbar: float) -> float | None:
    """Oscillator length ``sqrt(hbar/(m omega))`` of the potential's minimum."""
    k = potential.curvature_at_minimum() if isinstance(potential, Potential1D) else None
    if not k or k <= 0:
        return None
    omega = math.sqrt(k / mass)
    return math.sqrt(hbar / (mass * omega))


def build_hamiltonian(spec: HamiltonianSpec, n: int, *, basis_length=None,
                      guard: int | None = None) -> FockOperator:
    """Coherent-state quantized Hamiltonian on ``n`` levels.

    The free part ``A_{p^2/2m}`` is ``P^2/2m + hbar^2/(4 m ell^2)``; with
    ``include_rest_mass`` the constant equals ``m c^2`` and is written that
    way.  ``basis_length`` selects the ladder basis used to represent
    ``Q`` and ``P``.
    """
    s = spec.scales
    big = _assembly(n, guard)
    q, p = position_momentum(big, s, basis_length)
    pm = p.matrix
    eye = np.eye(big)
    kinetic_const = s.hbar ** 2 / (4 * spec.mass * s.ell ** 2)
    if spec.vector_potential is None:
        h = pm @ pm / (2 * spec.mass)
    else:
        e = spec.charge
        a_op = operator_of_position_function(spec.vector_potential, big, s,
                                             basis_length=basis_length, guard=0).matrix
        a2 = _square_of(spec.vector_potential)
        a2_op = operator_of_position_function(a2, big, s, basis_length=basis_length, guard=0).matrix
        k = pm - e * a_op
        h = k @ k / (2 * spec.mass) + e * e / (2 * spec.mass) * (a2_op - a_op @ a_op)
    if spec.potential is not None:
        h = h + operator_of_position_function(spec.potential, big, s,
                                              basis_length=basis_length, guard=0).matrix
    const = (spec.rest_energy if spec.include_rest_mass else kinetic_const) + spec.classical_proper_energy
    h = h + const * eye
    h = 0.5 * (h + h.conj().T)
    return FockOperator(h[:n, :n], hermitian=True)


def build_canonical_hamiltonian(spec: HamiltonianSpec, n: int, *, basis_length=None,
                                guard: int | None = None) -> FockOperator:
    """``(P - e A(Q))^2/2m + V(Q)`` without smoothing or proper energy."""
    s = spec.scales
    big = _assembly(n, guard)
    q, p = position_momentum(big, s, basis_length)
    pm = p.matrix
    k = pm
    if spec.vector_potential is not None:
        k = pm - spec.charge * operator_of_position_function(
            spec.vector_potential, big, s, basis_length=basis_length, guard=0, smooth=False).matrix
    h = k @ k / (2 * spec.mass)
    if spec.potential is not None:
        h = h + operator_of_position_function(spec.potential, big, s, basis_length=basis_length,
                                              guard=0, smooth=False).matrix
    h = 0.5 * (h + h.conj().T)
    return FockOperator(h[:n, :n], hermitian=True)


def _square_of(f):
    if isinstance(f, Polynomial1D):
        return Polynomial1D(tuple(np.polynomial.polynomial.polymul(f.coeffs, f.coeffs)))
    return lambda x: np.asarray(f(x), dtype=float) ** 2
