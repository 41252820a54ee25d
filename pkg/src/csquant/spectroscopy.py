"""Vibrational term values and isotope shifts of diatomic band systems.

All quantities are wavenumbers (cm^-1).  Three conventions are supported:

``QM``
    ``G(v) = w v - wx v^2 + wy v^3`` at half-integer ``v = n + 1/2``.
``CS``
    the QM terms plus the constant ``gamma * w_e`` with
    ``gamma = h c w_e / (16 mu c^2)`` of the coherent-state Hamiltonian.
``BS``
    old quantum theory: no half quantum.  The empirical term formula is
    ``w0 n - w0x0 n^2 + w0y0 n^3`` with the directly observed constants
    ``w0, w0x0, w0y0`` (those of the zero-referenced levels), and isotope
    scaling acts on those constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import constants as sc

__all__ = [
    "ElectronicState",
    "IsotopePair",
    "BandSystem",
    "ProgressionFit",
    "CONVENTIONS",
    "term_value",
    "zero_referenced_levels",
    "observed_constants",
    "band_frequency",
    "isotope_scaled_state",
    "isotopic_displacement",
    "fit_progression_constants",
    "recover_band_constants",
    "cs_gamma",
    "rest_energy_wavenumber",
]

CONVENTIONS = ("QM", "CS", "BS")

# m_u c^2 expressed in cm^-1
_U_WAVENUMBER = sc.physical_constants["atomic mass constant energy equivalent in MeV"][0] * 1e6 * sc.e / (
    sc.h * sc.c * 100)


def rest_energy_wavenumber(mass_u: float) -> float:
    return mass_u * _U_WAVENUMBER


def cs_gamma(omega: float, mass_u: float) -> float:
    """``hbar omega / (16 m c^2)`` for a vibration of ``omega`` cm^-1 and mass in u."""
    return omega / (16.0 * rest_energy_wavenumber(mass_u))


@dataclass(frozen=True)
class ElectronicState:
    omega_e: float
    omega_e_x_e: float = 0.0
    omega_e_y_e: float = 0.0
    t_min: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not self.omega_e > 0:
            raise ValueError("omega_e must be positive")
        if not (self.omega_e > abs(self.omega_e_x_e) >= abs(self.omega_e_y_e)):
            warnings.warn(f"state {self.name!r}: expected omega_e >> omega_e x_e >> omega_e y_e",
                          stacklevel=3)


def _g(state: ElectronicState, v):
    v = np.asarray(v, dtype=float)
    return state.omega_e * v - state.omega_e_x_e * v ** 2 + state.omega_e_y_e * v ** 3


def observed_constants(state: ElectronicState) -> ElectronicState:
    """State whose ``G(n)`` equals ``G(n + 1/2) - G(1/2)`` of ``state``.

    ``w0 = we - wexe + 3/4 weye``, ``w0x0 = wexe - 3/2 weye``, ``w0y0 = weye``;
    the potential minimum moves up by the zero-point energy.
    """
    we, wx, wy = state.omega_e, state.omega_e_x_e, state.omega_e_y_e
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ElectronicState(we - wx + 0.75 * wy, wx - 1.5 * wy, wy,
                               state.t_min + float(_g(state, 0.5)), state.name)


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def term_value(state: ElectronicState, v, convention: str = "QM", mass_u: float | None = None):
    """Vibrational term value.

    ``v`` is ``n + 1/2`` for QM and CS and ``n`` for BS.  The CS convention
    needs the oscillator mass (u) for its constant ``gamma * omega_e``.
    """
    _check_convention(convention)
    v = np.asarray(v, dtype=float)
    offset = 0.0 if convention == "BS" else 0.5
    if np.any(v - offset < 0) or np.any(np.abs((v - offset) - np.round(v - offset)) > 1e-12):
        raise ValueError(f"invalid vibrational argument {v} for convention {convention}")
    if convention == "BS":
        return _g(observed_constants(state), v)
    g = _g(state, v)
    if convention == "CS":
        if mass_u is None:
            raise ValueError("CS convention needs the oscillator mass")
        g = g + cs_gamma(state.omega_e, mass_u) * state.omega_e
    return g


def zero_referenced_levels(state: ElectronicState, n):
    """``G(n + 1/2) - G(1/2)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("vibrational quantum number must be >= 0")
    return _g(state, n + 0.5) - _g(state, 0.5)


@dataclass(frozen=True)
class IsotopePair:
    """Reduced masses (u) of a reference molecule and an isotopologue."""

    mu: float
    mu_iso: float

    def __post_init__(self):
        if not (self.mu > 0 and self.mu_iso > 0):
            raise ValueError("reduced masses must be positive")

    @classmethod
    def from_atoms(cls, reference: Sequence[float], isotopologue: Sequence[float]) -> "IsotopePair":
        (a, b), (c, d) = reference, isotopologue
        return cls(a * b / (a + b), c * d / (c + d))

    @classmethod
    def from_rho(cls, rho: float, mu: float = 1.0) -> "IsotopePair":
        return cls(mu, mu / rho ** 2)

    @property
    def rho(self) -> float:
        return math.sqrt(self.mu / self.mu_iso)

    def inverse(self) -> "IsotopePair":
        return IsotopePair(self.mu_iso, self.mu)


@dataclass(frozen=True)
class BandSystem:
    """Ground and excited electronic states plus a term convention.

    ``mass_u`` is the oscillator (reduced) mass used by the CS convention.
    """

    ground: ElectronicState
    excited: ElectronicState
    convention: str = "QM"
    mass_u: float | None = None

    def __post_init__(self):
        _check_convention(self.convention)
        if self.convention == "CS" and self.mass_u is None:
            raise ValueError("CS convention needs mass_u")

    @property
    def nu_ge(self) -> float:
        return self.excited.t_min - self.ground.t_min

    def with_convention(self, convention: str) -> "BandSystem":
        return replace(self, convention=convention)


def band_frequency(system: BandSystem, n_upper, n_lower):
    """Transition wavenumber ``nu_ge + G'(n') - G(n)`` under the system's convention."""
    n_upper = np.asarray(n_upper, dtype=float)
    n_lower = np.asarray(n_lower, dtype=float)
    if np.any(n_upper < 0) or np.any(n_lower < 0):
        raise ValueError("vibrational quantum numbers must be >= 0")
    half = 0.0 if system.convention == "BS" else 0.5
    up = term_value(system.excited, n_upper + half, system.convention, system.mass_u)
    lo = term_value(system.ground, n_lower + half, system.convention, system.mass_u)
    return system.nu_ge + up - lo


def isotope_scaled_state(state: ElectronicState, pair: IsotopePair) -> ElectronicState:
    """Constants of the isotopologue: ``rho``, ``rho^2``, ``rho^3`` scaling."""
    r = pair.rho
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ElectronicState(state.omega_e * r, state.omega_e_x_e * r ** 2,
                               state.omega_e_y_e * r ** 3, state.t_min, state.name)


def _iso_system(system: BandSystem, pair: IsotopePair) -> BandSystem:
    if system.convention == "BS":
        # Bohr-Sommerfeld constants are the observed ones; scale those
        g = isotope_scaled_state(observed_constants(system.ground), pair)
        e = isotope_scaled_state(observed_constants(system.excited), pair)
        # keep nu_ge: the electronic separation is the same for isotopologues
        g = _bs_inverse(g, system.ground.t_min)
        e = _bs_inverse(e, system.excited.t_min)
        return replace(system, ground=g, excited=e)
    mass = None if system.mass_u is None else system.mass_u * pair.mu_iso / pair.mu
    return replace(system, ground=isotope_scaled_state(system.ground, pair),
                   excited=isotope_scaled_state(system.excited, pair), mass_u=mass)


def _bs_inverse(obs: ElectronicState, t_min: float) -> ElectronicState:
    # state whose observed constants are ``obs`` (inverse of observed_constants)
    w0, w0x0, wy = obs.omega_e, obs.omega_e_x_e, obs.omega_e_y_e
    wx = w0x0 + 1.5 * wy
    we = w0 + wx - 0.75 * wy
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ElectronicState(we, wx, wy, t_min, obs.name)


def isotopic_displacement(system: BandSystem, pair: IsotopePair, n_upper, n_lower,
                          convention: str | None = None):
    """``nu_iso(n', n) - nu(n', n)`` for the band ``n' -> n``.

    ``pair.mu`` belongs to the molecule described by ``system`` and
    ``pair.mu_iso`` to the isotopologue; both share the electronic terms.
    """
    if convention is not None:
        system = system.with_convention(convention)
    iso = _iso_system(system, pair)
    return band_frequency(iso, n_upper, n_lower) - band_frequency(system, n_upper, n_lower)


@dataclass(frozen=True)
class ProgressionFit:
    """Least-squares fit ``value = A v + B v^2 + C`` with ``v = n' + 1/2``.

    For an ``n' -> 0`` progression ``A = (rho-1) w'_e``,
    ``B = -(rho^2-1) w'_e x'_e`` and ``C`` collects the lower-state
    zero-point shift.
    """

    a: float
    b: float
    c: float
    rho: float
    residual: float
    n_upper: tuple[int, ...]

    def predict(self, n_upper):
        v = np.asarray(n_upper, dtype=float) + 0.5
        return self.a * v + self.b * v ** 2 + self.c

    def predict_bohr_sommerfeld(self, n_upper):
        """Same constants without half quanta.

        The BS linear constant is the observed ``w'_0 = w'_e - w'_e x'_e``,
        so its isotope term is ``A + B/(rho+1)``; the quadratic term is
        unchanged and there is no constant.
        """
        n = np.asarray(n_upper, dtype=float)
        return (self.a + self.b / (self.rho + 1)) * n + self.b * n ** 2


def fit_progression_constants(displacements: Iterable[tuple[int, float]], rho: float) -> ProgressionFit:
    pts = sorted((int(n), float(v)) for n, v in displacements)
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    if np.unique(n).size < 3:
        raise ValueError("need at least three distinct upper quantum numbers")
    v = n + 0.5
    x = np.column_stack([v, v ** 2, np.ones_like(v)])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = float(np.max(np.abs(x @ coef - y)))
    return ProgressionFit(float(coef[0]), float(coef[1]), float(coef[2]), float(rho), resid,
                          tuple(int(k) for k in n))


def recover_band_constants(fit: ProgressionFit, ground_omega_e_x_e: float) -> tuple[float, float, float]:
    """Invert a fit for ``(w'_e, w'_e x'_e, w_e)``.

    The constant term involves two ground-state constants, so the ground
    anharmonicity has to be supplied.
    """
    r = fit.rho
    we_up = fit.a / (r - 1)
    wx_up = -fit.b / (r * r - 1)
    we_low = 2 * (-fit.c + (r * r - 1) * ground_omega_e_x_e / 4) / (r - 1)
    return we_up, wx_up, we_low
