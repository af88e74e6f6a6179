"""Matrix form of the reduced fourth-order operator and its determinant condition.

On an invariant subspace the gauge-transformed operator is the quadratic
combination

    R2:  4 g^2 (J-)^2 + 4 g S - 2 g^2 J- + 4 J+ - omega0^2 - a0
    R3:  4 g^2 (J-)^2 - 4 g S - 2 g^2 J- + 4 J+ - omega0^2 - a0

of the generator matrices, and a QES eigenstate exists exactly where its
determinant vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .algebra import Family, OperatorMatrix, SubspaceSpec, build_generators, commutator, compose

__all__ = [
    "TprhParams",
    "QesBranch",
    "BranchParameters",
    "QesSolution",
    "CurvePoint",
    "GRID_POINTS",
    "ROOT_TOL",
    "branch_parameters",
    "branch_subspace",
    "build_l1_matrix",
    "l1_determinant",
    "determinant_roots",
    "solution_at",
    "closed_form_g",
    "has_closed_form",
    "closed_form_window",
]

GRID_POINTS = 2000
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class TprhParams:
    """Dimensionless parameters: level splitting ``omega0`` and coupling ``g``."""

    omega0: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and math.isfinite(self.g)):
            raise ValueError("omega0 and g must be finite")


@dataclass(frozen=True)
class QesBranch:
    family: Family
    N: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def parse(cls, text: str) -> "QesBranch":
        """Parse ``"r2:0"`` / ``"R3,2"`` style tags."""
        for sep in (":", ",", "/"):
            if sep in text:
                fam, n = text.split(sep, 1)
                return cls(Family.parse(fam.strip()), int(n))
        raise ValueError(f"cannot parse branch {text!r}; expected e.g. 'r2:0'")

    def __str__(self):
        return f"{self.family.value.lower()}:{self.N}"


@dataclass(frozen=True)
class BranchParameters:
    alpha: float
    s: float
    c: float
    xi: float
    energy: float
    a0: float


def _check_open_unit(g: float):
    if not 0.0 < g < 1.0:
        raise ValueError(f"coupling g={g} outside (0, 1)")


def _alpha_s(branch: QesBranch) -> tuple[float, float]:
    if branch.family is Family.R2:
        return -0.75, -0.5
    return 0.75 - branch.N / 2, 0.5


def _a0(branch: QesBranch, g: float) -> float:
    N, g2 = branch.N, g * g
    if branch.family is Family.R2:
        return (3 + 4 * N) * (4 * N * (g2 - 1) - 3 + 5 * g2) / 4
    return (1 + 2 * N) * (2 * N * (g2 - 1) - 1 + 3 * g2) / 4


def branch_subspace(branch: QesBranch) -> SubspaceSpec:
    alpha, s = _alpha_s(branch)
    return SubspaceSpec(branch.family, branch.N, alpha, s)


def branch_parameters(branch: QesBranch, g: float) -> BranchParameters:
    """Subspace, gauge, variable-change and energy parameters at coupling ``g``."""
    _check_open_unit(g)
    alpha, s = _alpha_s(branch)
    root = math.sqrt(1 - g * g)
    if branch.family is Family.R2:
        c = 0.5 * math.sqrt((1 + g) / (1 - g))
        xi = g / root
        energy = -0.5 + 2 * (branch.N + 1) * root
    else:
        c = 0.5 * math.sqrt((1 - g) / (1 + g))
        xi = -g / root
        energy = -0.5 + (branch.N + 1) * root
    return BranchParameters(alpha, s, c, xi, energy, _a0(branch, g))


def _l1_parts(branch: QesBranch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(A, B, C)`` with ``L1 = g^2 A + g B + C - (omega0^2 + a0(g)) I``."""
    spec = branch_subspace(branch)
    gens = build_generators(spec)
    jp, jm = gens.jplus.entries, gens.jminus.entries
    S = commutator(jp, jm)
    sign = 1.0 if branch.family is Family.R2 else -1.0
    return 4 * compose(jm, jm) - 2 * jm, sign * 4 * S, 4 * jp


def _l1_stack(branch: QesBranch, omega0: float, gs: np.ndarray) -> np.ndarray:
    a, b, c = _l1_parts(branch)
    shift = omega0 * omega0 + np.array([_a0(branch, g) for g in gs])
    eye = np.eye(a.shape[0])
    return (
        gs[:, None, None] ** 2 * a
        + gs[:, None, None] * b
        + c
        - shift[:, None, None] * eye
    )


def build_l1_matrix(branch: QesBranch, params: TprhParams) -> OperatorMatrix:
    """Row-action matrix of the gauge-transformed reduced operator.

    Entries are polynomial in ``g``, so any ``0 <= g <= 1`` is accepted here;
    the physical branch needs ``0 < g < 1``.
    """
    g = params.g
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"coupling g={g} outside [0, 1]")
    m = _l1_stack(branch, params.omega0, np.array([float(g)]))[0]
    return OperatorMatrix(m, branch_subspace(branch))


def l1_determinant(branch: QesBranch, omega0: float, g: float) -> float:
    return float(np.linalg.det(build_l1_matrix(branch, TprhParams(omega0, g)).entries))


@dataclass(frozen=True, eq=False)
class QesSolution:
    """One QES point with its certified left null vector."""

    branch: QesBranch
    omega0: float
    g: float
    energy: float
    null_vector: np.ndarray
    certificate: float
    closed_form_checked: bool = False

    def __post_init__(self):
        v = np.array(self.null_vector, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "null_vector", v)


def _left_null_vector(m: np.ndarray) -> tuple[np.ndarray, float]:
    # smallest right singular vector of M^T, i.e. v with v^T M ~ 0
    _, _, vt = np.linalg.svd(m.T)
    v = vt[-1]
    # fix the overall sign so output is deterministic
    pivot = np.argmax(np.abs(v))
    if v[pivot] < 0:
        v = -v
    cert = float(np.linalg.norm(m.T @ v) / np.linalg.norm(v))
    return v, cert


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def determinant_roots(branch: QesBranch, omega0: float, grid: int = GRID_POINTS) -> list[QesSolution]:
    """All couplings ``0 < g < 1`` where the reduced determinant vanishes.

    Sign changes on a uniform ``grid``-point mesh of ``[0, 1]`` are refined by
    bisection to ``|dg| < ROOT_TOL``.  A root lying between two grid points
    with no sign change (a tangency) is not detected.
    """
    if not omega0 > 0:
        raise ValueError(f"omega0 must be positive, got {omega0}")

    def det(g):
        return float(np.linalg.det(_l1_stack(branch, omega0, np.array([g]))[0]))

    gs = np.linspace(0.0, 1.0, grid)
    ds = np.linalg.det(_l1_stack(branch, omega0, gs))
    roots = []
    for i in range(grid - 1):
        if ds[i] == 0.0:
            if 0.0 < gs[i] < 1.0:
                roots.append(float(gs[i]))
        elif ds[i] * ds[i + 1] < 0:
            roots.append(_bisect(det, gs[i], gs[i + 1], ds[i], ROOT_TOL))

    closed = has_closed_form(branch)
    out = []
    for g in roots:
        if not 0.0 < g < 1.0:
            continue
        m = build_l1_matrix(branch, TprhParams(omega0, g)).entries
        v, cert = _left_null_vector(m)
        energy = branch_parameters(branch, g).energy
        out.append(QesSolution(branch, float(omega0), float(g), energy, v, cert, closed))
    return out


def solution_at(branch: QesBranch, omega0: float, g: float) -> QesSolution:
    """Package a known root ``g`` (e.g. from the closed form) as a solution."""
    m = build_l1_matrix(branch, TprhParams(omega0, g)).entries
    v, cert = _left_null_vector(m)
    energy = branch_parameters(branch, g).energy
    return QesSolution(branch, float(omega0), float(g), energy, v, cert, has_closed_form(branch))


# --- closed forms -------------------------------------------------------------


class CurvePoint(NamedTuple):
    g: float
    boundary: bool


_CLOSED = {(Family.R2, 0), (Family.R3, 2)}


def has_closed_form(branch: QesBranch) -> bool:
    return (branch.family, branch.N) in _CLOSED


def closed_form_window(branch: QesBranch) -> tuple[float, float]:
    """Union of the omega0 windows in which the closed forms give 0 < g < 1."""
    if not has_closed_form(branch):
        raise ValueError(f"no closed-form coupling curve for branch {branch}")
    return (0.5, 1.5) if branch.family is Family.R2 else (0.5, 2.5)


def _point(radicand: float, scale: float, on_edge: bool) -> CurvePoint:
    g = math.sqrt(max(radicand, 0.0)) * scale
    return CurvePoint(g, on_edge or not 0.0 < g < 1.0)


def closed_form_g(branch: QesBranch, omega0: float) -> list[CurvePoint]:
    """Closed-form couplings at ``omega0``, ascending in ``g``.

    Values on a window edge (``g = 0`` or ``g = 1``) are returned with
    ``boundary=True``; they are not QES solutions.
    """
    if not has_closed_form(branch):
        raise ValueError(f"no closed-form coupling curve for branch {branch}")
    w = float(omega0)
    if not w > 0:
        return []
    if branch.family is Family.R2:
        if not 0.5 <= w <= 1.5:
            return []
        rad = (4 * w * w - 9) * (1 - 4 * w * w)
        return [_point(rad, 1 / (8 * w), w in (0.5, 1.5))]

    out = []
    # g_-: window (1/2, 3/2)
    if 0.5 <= w <= 1.5:
        rad = (5 + 2 * w) * (2 * w - 3) * (1 - 2 * w) / w
        out.append(_point(rad, 1 / 8, w in (0.5, 1.5)))
    # g_+: window (1/2, 5/2)
    if 0.5 <= w <= 2.5:
        rad = (5 - 2 * w) * (2 * w + 3) * (1 + 2 * w) / w
        out.append(_point(rad, 1 / 8, w in (0.5, 2.5)))
    return sorted(out)
