"""Low-lying spectra of truncated Hamiltonians.

The truncation is controlled by doubling: a level counts as converged when
it moves by less than ``tol`` between ``N`` and ``2N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convolution import (
    Harmonic,
    HamiltonianSpec,
    build_canonical_hamiltonian,
    build_hamiltonian,
    natural_length,
)
from .fock import PhaseSpaceScales, hermitian_eigensystem

__all__ = [
    "SpectrumResult",
    "ConvergenceError",
    "spectrum",
    "harmonic_reference",
    "gamma_factor",
    "ComparisonTable",
    "compare_canonical_cs",
]

MAX_DIM = 2048


class ConvergenceError(RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    converged_count: int
    dims: tuple[int, int]
    deltas: np.ndarray

    @property
    def converged(self) -> np.ndarray:
        return np.arange(self.eigenvalues.size) < self.converged_count


def _lowest(builder, n, k):
    h = builder(n)
    vals, _ = hermitian_eigensystem(np.asarray(h))
    return vals[:k]


def spectrum(builder: Callable[[int], object], k: int, tol: float = 1e-9,
             start: int | None = None, max_dim: int = MAX_DIM) -> SpectrumResult:
    """Lowest ``k`` eigenvalues of ``builder(N)`` converged under N-doubling.

    ``builder`` maps a dimension to a Hermitian matrix (or FockOperator).
    A level is converged when it moves by less than ``tol`` plus the
    eigensolver's roundoff ``16 eps |E|``.
    Raises :class:`ConvergenceError` when ``max_dim`` is reached first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = start or max(8 * k, 64)
    lo = _lowest(builder, n, k)
    history = []
    while True:
        n2 = 2 * n
        if n2 > max_dim:
            raise ConvergenceError(
                f"lowest {k} levels not converged to {tol:g} by N={n}",
                {"dims": n, "max_delta": float(history[-1]) if history else math.nan,
                 "history": history})
        hi = _lowest(builder, n2, k)
        delta = np.abs(hi - lo)
        history.append(float(delta.max()))
        # levels sitting on a large constant (m c^2) cannot move less than roundoff
        floor = 16 * np.finfo(float).eps * np.abs(hi)
        if np.all(delta < tol + floor):
            # k <= N/4 holds since N >= 8k
            return SpectrumResult(hi, int(k), (n, n2), delta)
        n, lo = n2, hi


def gamma_factor(hbar_omega: float, rest_energy: float) -> float:
    """``hbar omega / (16 m c^2)``."""
    return hbar_omega / (16.0 * rest_energy)


def harmonic_reference(m: float, omega: float, scales: PhaseSpaceScales, levels: int = 10) -> np.ndarray:
    """Exact levels ``(n + 1/2 + gamma) hbar omega + m c^2`` of the CS oscillator."""
    if scales.c is None:
        raise ValueError("harmonic reference needs the speed of light")
    hw = scales.hbar * omega
    mc2 = m * scales.c ** 2
    n = np.arange(levels)
    return (n + 0.5 + gamma_factor(hw, mc2)) * hw + mc2


@dataclass(frozen=True)
class ComparisonTable:
    n: np.ndarray
    canonical: np.ndarray
    cs: np.ndarray
    offset: float
    canonical_spacing: np.ndarray
    cs_spacing: np.ndarray

    @property
    def spacing_discrepancy(self) -> np.ndarray:
        """Relative difference of level spacings."""
        return np.abs(self.cs_spacing - self.canonical_spacing) / np.abs(self.canonical_spacing)

    @property
    def max_relative_spacing_discrepancy(self) -> float:
        return float(self.spacing_discrepancy.max()) if self.n.size > 1 else 0.0

    def rows(self):
        for i, n in enumerate(self.n):
            yield int(n), self.canonical[i], self.cs[i], self.cs[i] - self.canonical[i]


def compare_canonical_cs(spec: HamiltonianSpec, k: int = 5, *, basis_length=None,
                         tol: float = 1e-9, start: int | None = None) -> ComparisonTable:
    """Canonical ``P^2/2m + V(Q)`` against CS ``P^2/2m + V~(Q) + m c^2 + E0``.

    Both spectra are computed in the same ladder basis (by default the
    oscillator length of the potential's minimum).
    """
    if basis_length is None and spec.potential is not None:
        basis_length = natural_length(spec.potential, spec.mass, spec.scales.hbar)

    def cs(n):
        return build_hamiltonian(spec, n, basis_length=basis_length)

    def can(n):
        return build_canonical_hamiltonian(spec, n, basis_length=basis_length)

    if spec.potential is None and spec.vector_potential is None:
        # free particle: continuous spectrum; only the offset is meaningful
        offset = spec.rest_energy + spec.classical_proper_energy
        if not spec.include_rest_mass:
            offset += spec.scales.hbar ** 2 / (4 * spec.mass * spec.scales.ell ** 2)
        e = np.zeros(0)
        return ComparisonTable(np.arange(0), e, e, offset, e, e)

    ec = spectrum(can, k, tol, start).eigenvalues
    eq = spectrum(cs, k, tol, start).eigenvalues
    return ComparisonTable(np.arange(k), ec, eq, float(eq[0] - ec[0]), np.diff(ec), np.diff(eq))


def harmonic_spec(m: float, omega: float, scales: PhaseSpaceScales) -> HamiltonianSpec:
    return HamiltonianSpec(m, scales, potential=Harmonic.from_mass_frequency(m, omega))
