"""Brute-force spectrum of the two-photon Rabi Hamiltonian in a truncated number basis.

The dimensionless Hamiltonian is the 2x2 block operator

    [[L+, omega0], [omega0, L-]],   L(+/-) = b^+ b +/- (g/2) (b^+^2 + b^2),

with rows ``0..nmax`` for the first spin component and ``nmax+1..2nmax+1``
for the second.  It is independent of the subspace machinery and serves as
the reference against which QES energies are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .reduction import TprhParams

__all__ = [
    "FockTruncation",
    "SpectrumResult",
    "SupercriticalCouplingError",
    "build_hamiltonian",
    "parity_blocks",
    "spectrum",
    "nearest_eigenvalue",
    "TRACKED_LEVELS",
]

TRACKED_LEVELS = 20


class SupercriticalCouplingError(ValueError):
    """Raised for g >= 1, where the spectrum is unbounded below."""


@dataclass(frozen=True)
class FockTruncation:
    nmax: int

    def __post_init__(self):
        if isinstance(self.nmax, bool) or int(self.nmax) != self.nmax or self.nmax < 2:
            raise ValueError(f"nmax must be an integer >= 2, got {self.nmax}")
        object.__setattr__(self, "nmax", int(self.nmax))

    @property
    def dim(self) -> int:
        return 2 * (self.nmax + 1)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    nmax_used: int
    convergence_gap: float
    converged: bool = True
    supercritical: bool = False


def _ladder_block(nmax: int, g: float, sign: float) -> np.ndarray:
    n = np.arange(nmax + 1, dtype=float)
    block = np.diag(n)
    off = sign * 0.5 * g * np.sqrt((n[:-2] + 1) * (n[:-2] + 2))
    idx = np.arange(nmax - 1)
    block[idx, idx + 2] = off
    block[idx + 2, idx] = off
    return block


def build_hamiltonian(params: TprhParams, trunc: FockTruncation) -> np.ndarray:
    """Symmetric ``2(nmax+1)`` matrix of the truncated Hamiltonian."""
    nmax = trunc.nmax
    size = nmax + 1
    h = np.zeros((2 * size, 2 * size))
    h[:size, :size] = _ladder_block(nmax, params.g, 1.0)
    h[size:, size:] = _ladder_block(nmax, params.g, -1.0)
    coupling = params.omega0 * np.eye(size)
    h[:size, size:] = coupling
    h[size:, :size] = coupling
    return h


def parity_blocks(params: TprhParams, trunc: FockTruncation) -> tuple[np.ndarray, np.ndarray]:
    """Even- and odd-photon-number sectors, each carrying both spin components.

    Every term of the Hamiltonian changes the photon number by 0 or 2, so the
    two sectors decouple exactly.
    """
    h = build_hamiltonian(params, trunc)
    size = trunc.nmax + 1
    n = np.concatenate([np.arange(size), np.arange(size)])
    even = np.flatnonzero(n % 2 == 0)
    odd = np.flatnonzero(n % 2 == 1)
    return h[np.ix_(even, even)], h[np.ix_(odd, odd)]


def _eigenvalues(params: TprhParams, trunc: FockTruncation) -> np.ndarray:
    even, odd = parity_blocks(params, trunc)
    vals = np.concatenate([eigh(even, eigvals_only=True), eigh(odd, eigvals_only=True)])
    return np.sort(vals)


def spectrum(
    params: TprhParams,
    trunc: FockTruncation,
    tol: float = 1e-6,
    allow_supercritical: bool = False,
) -> SpectrumResult:
    """Sorted eigenvalues plus a truncation-convergence estimate.

    ``convergence_gap`` is the largest shift among the lowest
    ``TRACKED_LEVELS`` eigenvalues between ``nmax`` and ``nmax // 2``.

    Raises
    ------
    SupercriticalCouplingError
        If ``|g| >= 1`` and ``allow_supercritical`` is false.
    """
    supercritical = abs(params.g) >= 1.0
    if supercritical and not allow_supercritical:
        raise SupercriticalCouplingError(
            f"g={params.g} >= 1: spectrum unbounded below; pass allow_supercritical to diagnose"
        )
    vals = _eigenvalues(params, trunc)
    half = FockTruncation(max(2, trunc.nmax // 2))
    coarse = _eigenvalues(params, half)
    k = min(TRACKED_LEVELS, len(coarse))
    gap = float(np.max(np.abs(vals[:k] - coarse[:k])))
    converged = gap <= tol and not supercritical
    return SpectrumResult(vals, trunc.nmax, gap, converged, supercritical)


def nearest_eigenvalue(result: SpectrumResult, energy: float) -> tuple[float, float]:
    """``(eigenvalue, |eigenvalue - energy|)`` for the closest level."""
    i = int(np.argmin(np.abs(result.eigenvalues - energy)))
    lam = float(result.eigenvalues[i])
    return lam, abs(lam - energy)
