"""Finite-dimensional representations of the quadratic algebras J2 and J3.

Matrices follow the row-action convention: row ``i`` holds the expansion of
the image of basis function ``i``, ``J f_i = sum_j M[i, j] f_j``.  Operator
composition therefore reverses matrix order: ``A o B  ->  M_B @ M_A``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .special_functions import (
    BasisFunction,
    KummerFunction,
    apply_operator,
    eval_basis,
    eval_basis_derivative,
)

polyval = np.polynomial.polynomial.polyval

__all__ = [
    "ROW_ACTION",
    "Family",
    "SubspaceSpec",
    "OperatorMatrix",
    "Generators",
    "basis_order",
    "differential_operators",
    "build_j2",
    "build_j3",
    "build_generators",
    "compose",
    "commutator",
    "commutator_s",
    "RelationResidual",
    "RelationReport",
    "check_quadratic_relations",
    "differential_action_error",
    "parameter_map_r2_to_r3",
    "parameter_map_error",
]

ROW_ACTION = "row-action"


class Family(str, enum.Enum):
    R2 = "R2"
    R3 = "R3"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


def _pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class SubspaceSpec:
    """Invariant subspace: ``family``, size ``N`` and Kummer parameters."""

    family: Family
    N: int
    alpha: float
    s: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (np.isfinite(self.alpha) and np.isfinite(self.s)):
            raise ValueError("alpha and s must be finite")
        if _pole(self.s):
            raise ValueError(f"s={self.s} is a pole of 1F1")
        if self.family is Family.R2 and _pole(self.s + 1):
            raise ValueError(f"s+1={self.s + 1} is a pole of 1F1")

    @property
    def dim(self) -> int:
        return 2 * (self.N + 1) if self.family is Family.R2 else self.N + 1


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense real matrix of an operator restricted to a subspace (row action)."""

    entries: np.ndarray
    spec: SubspaceSpec | None = None
    convention: str = field(default=ROW_ACTION, init=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"OperatorMatrix(dim={self.dim}, entries={self.entries.tolist()!r})"


@dataclass(frozen=True)
class Generators:
    jminus: OperatorMatrix
    jplus: OperatorMatrix


def basis_order(spec: SubspaceSpec) -> list[BasisFunction]:
    """Basis functions in matrix order.

    R2: ``f_0+ .. f_N+, f_0- .. f_N-`` with ``f_n+ = t^n 1F1(alpha; s)``,
    ``f_n- = t^n 1F1(alpha+1; s+1)``.  R3: ``f_n = 1F1(alpha+n; s)``.
    """
    a, s, N = spec.alpha, spec.s, spec.N
    if spec.family is Family.R2:
        plus = [BasisFunction(KummerFunction(a, s), n) for n in range(N + 1)]
        minus = [BasisFunction(KummerFunction(a + 1, s + 1), n) for n in range(N + 1)]
        return plus + minus
    return [BasisFunction(KummerFunction(a + n, s), 0) for n in range(N + 1)]


def differential_operators(spec: SubspaceSpec) -> dict[str, tuple[list[float], list[float], list[float]]]:
    """Coefficient polynomials ``(p2, p1, p0)`` of the second-order generators.

    Keys ``"minus"`` and ``"plus"``; polynomials in increasing powers of t.
    """
    a, s, N = spec.alpha, spec.s, spec.N
    if spec.family is Family.R2:
        return {
            "minus": ([0.0, 1.0], [1.0 + s, -1.0], []),
            "plus": ([0.0, 0.0, 1.0], [0.0, s - 2 * N, -1.0], [0.0, N - a]),
        }
    return {
        "minus": ([0.0, 1.0], [s, -1.0], []),
        "plus": ([0.0, 0.0, 1.0], [0.0, s - N, -1.0], [0.0, -a]),
    }


def _require(spec: SubspaceSpec, family: Family):
    if spec.family is not family:
        raise ValueError(f"expected a {family.value} subspace, got {spec.family.value}")


def build_j2(spec: SubspaceSpec) -> Generators:
    _require(spec, Family.R2)
    a, s, N = spec.alpha, spec.s, spec.N
    d = spec.dim
    jp = np.zeros((d, d))
    jm = np.zeros((d, d))

    def P(n):
        return n

    def M(n):
        return N + 1 + n

    for n in range(N + 1):
        A = n - 2 * N
        B = n - N
        jp[P(n), P(n)] = n * (A - 1 + s)
        jp[M(n), M(n)] = (s - n) * (1 - A)
        jp[M(n), P(n)] = s * (2 * B - 1)
        # the f_{n+1} coefficients carry B_n, which vanishes at n = N
        if n < N:
            jp[P(n), P(n + 1)] = -B
            jp[P(n), M(n + 1)] = 2 * a * B / s
            jp[M(n), M(n + 1)] = B

        jm[P(n), P(n)] = a - n
        jm[P(n), M(n)] = a * (1 + 2 * n) / s
        jm[M(n), M(n)] = a + n + 1
        if n > 0:
            jm[P(n), P(n - 1)] = n * (n + s)
            jm[M(n), M(n - 1)] = n * (n - s)
            jm[M(n), P(n - 1)] = 2 * n * s
    return Generators(OperatorMatrix(jm, spec), OperatorMatrix(jp, spec))


def build_j3(spec: SubspaceSpec) -> Generators:
    _require(spec, Family.R3)
    a, s, N = spec.alpha, spec.s, spec.N
    d = spec.dim
    jp = np.zeros((d, d))
    jm = np.zeros((d, d))
    for n in range(d):
        an = n + a
        jm[n, n] = an
        jp[n, n] = s * n + an * (N - 2 * n)
        if n < N:
            jp[n, n + 1] = an * (n - N)
        if n > 0:
            jp[n, n - 1] = n * (an - s)
    return Generators(OperatorMatrix(jm, spec), OperatorMatrix(jp, spec))


def build_generators(spec: SubspaceSpec) -> Generators:
    return build_j2(spec) if spec.family is Family.R2 else build_j3(spec)


def _m(op) -> np.ndarray:
    return op.entries if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=float)


def compose(*ops) -> np.ndarray:
    """Matrix of the operator product ``ops[0] o ops[1] o ...``."""
    out = _m(ops[0])
    for op in ops[1:]:
        out = _m(op) @ out
    return out


def commutator(a, b) -> np.ndarray:
    """Matrix of the operator commutator ``[A, B] = AB - BA``."""
    ma, mb = _m(a), _m(b)
    return mb @ ma - ma @ mb


def commutator_s(jplus: OperatorMatrix, jminus: OperatorMatrix) -> OperatorMatrix:
    """``S = [J+, J-]`` in row-action form, ``M_- M_+ - M_+ M_-``."""
    if _m(jplus).shape != _m(jminus).shape:
        raise ValueError(f"dimension mismatch: {_m(jplus).shape} vs {_m(jminus).shape}")
    spec = jplus.spec if isinstance(jplus, OperatorMatrix) else None
    return OperatorMatrix(commutator(jplus, jminus), spec)


# --- quadratic commutation relations -----------------------------------------


@dataclass(frozen=True)
class RelationResidual:
    relation: str
    variant: tuple[int, ...]
    canonical: bool
    residual: float


@dataclass
class RelationReport:
    """Frobenius residuals of both quadratic relations under every sign variant.

    ``variant`` tuples hold the signs multiplying the structure-constant terms:
    ``(c5, c6, c7)`` for ``[J+, S]`` and ``(c5, const)`` for ``[J-, S]``.
    """

    spec: SubspaceSpec
    constants: dict[str, float]
    residuals: list[RelationResidual]
    fitted: dict[str, list[float]]

    def best(self, relation: str) -> RelationResidual:
        # exact ties (e.g. a vanishing generator) resolve to the canonical signs
        return min(
            (r for r in self.residuals if r.relation == relation),
            key=lambda r: (r.residual, not r.canonical),
        )

    @property
    def best_residual(self) -> float:
        return max(self.best(name).residual for name in ("[J+,S]", "[J-,S]"))

    def holds(self, tol: float = 1e-10) -> bool:
        return self.best_residual < tol

    def passing(self, tol: float = 1e-10) -> list[RelationResidual]:
        return [r for r in self.residuals if r.residual < tol]


def _structure_constants(spec: SubspaceSpec) -> dict[str, float]:
    a, s, N = spec.alpha, spec.s, spec.N
    if spec.family is Family.R2:
        return {
            "c5": 2 * (1 + a) + s,
            "c6": (2 * N - s) * (s - 2 - 2 * N),
            "c7": (N - a) * (2 + 2 * N - s) * (s + 1),
            "k": (a - N) * (s + 1),
        }
    return {
        "c5": s + 2 * a + N,
        "c6": (N + 2 - s) * (N - s),
        "c7": s * a * (N + 2 - s),
        "k": s * a,
    }


# sign conventions of the standard form of the relations; the J3 relation
# uses J3 generators throughout
_CANONICAL_SIGNS = {
    Family.R2: {"[J+,S]": (-1, -1, -1), "[J-,S]": (1, -1)},
    Family.R3: {"[J+,S]": (-1, 1, 1), "[J-,S]": (1, -1)},
}


def check_quadratic_relations(spec: SubspaceSpec, scale: float = 1.0) -> RelationReport:
    """Evaluate both quadratic relations as matrix identities on ``spec``.

    ``[J+, S] = 4 J+J- - 2S + e5 c5 J+ + e6 c6 J- + e7 c7``
    ``[J-, S] = -2 (J-)^2 - J+ + e5 c5 J- + ek k``

    for all sign choices ``e``.  ``scale`` multiplies both generators (the
    relations are then checked on the rescaled matrices, so only ``scale=1``
    is expected to satisfy them).  The report also carries the least-squares
    coefficients of ``J+, J-, 1`` that best fit each relation's remainder.
    """
    gens = build_generators(spec)
    jp = scale * gens.jplus.entries
    jm = scale * gens.jminus.entries
    eye = np.eye(spec.dim)
    S = commutator(jp, jm)
    c = _structure_constants(spec)

    lhs1 = commutator(jp, S)
    base1 = 4 * compose(jp, jm) - 2 * S
    lhs2 = commutator(jm, S)
    base2 = -2 * compose(jm, jm) - jp

    residuals = []
    canonical = _CANONICAL_SIGNS[spec.family]
    for signs in itertools.product((1, -1), repeat=3):
        rhs = base1 + signs[0] * c["c5"] * jp + signs[1] * c["c6"] * jm + signs[2] * c["c7"] * eye
        residuals.append(
            RelationResidual("[J+,S]", signs, signs == canonical["[J+,S]"], float(np.linalg.norm(lhs1 - rhs)))
        )
    for signs in itertools.product((1, -1), repeat=2):
        rhs = base2 + signs[0] * c["c5"] * jm + signs[1] * c["k"] * eye
        residuals.append(
            RelationResidual("[J-,S]", signs, signs == canonical["[J-,S]"], float(np.linalg.norm(lhs2 - rhs)))
        )

    design = np.stack([jp.ravel(), jm.ravel(), eye.ravel()], axis=1)
    fitted = {
        "[J+,S]": np.linalg.lstsq(design, (lhs1 - base1).ravel(), rcond=None)[0].tolist(),
        "[J-,S]": np.linalg.lstsq(design, (lhs2 - base2).ravel(), rcond=None)[0].tolist(),
    }
    return RelationReport(spec, c, residuals, fitted)


# --- differential-action checks ----------------------------------------------


def differential_action_error(spec: SubspaceSpec, ts) -> float:
    """Largest scaled mismatch between differential and matrix actions.

    For each generator, basis function ``f_i`` and sample ``t``, compares
    ``J f_i(t)`` from the differential operator with ``sum_j M[i, j] f_j(t)``.
    The error is relative to the size of the individual terms on either side,
    so exact zeros on both sides do not blow up.
    """
    ts = np.asarray(ts, dtype=float)
    basis = basis_order(spec)
    gens = build_generators(spec)
    values = np.array([eval_basis(bf, ts) for bf in basis])
    ops = differential_operators(spec)
    worst = 0.0
    for key, mat in (("minus", gens.jminus.entries), ("plus", gens.jplus.entries)):
        p2, p1, p0 = ops[key]
        for i, bf in enumerate(basis):
            lhs = apply_operator(p2, p1, p0, bf, ts)
            rhs = mat[i] @ values
            # size of the separate terms p_k(t) f^(k)(t), not of their sum
            terms = sum(
                np.abs(polyval(ts, p) * eval_basis_derivative(bf, k, ts))
                for k, p in ((2, p2), (1, p1), (0, p0))
                if len(p)
            )
            scale = np.maximum(np.abs(mat[i]) @ np.abs(values), terms)
            scale = np.where(scale == 0.0, 1.0, scale)
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


def parameter_map_r2_to_r3(alpha_p: float, s_p: float, n_p: int) -> SubspaceSpec:
    """R2 parameters whose generators coincide with the R3 ones at (alpha', s', N').

    ``(alpha' + (N'-1)/2, s' - 1, (N'-1)/2)``; only odd ``N'`` has an integer
    image.
    """
    if isinstance(n_p, bool) or int(n_p) != n_p or n_p < 1 or n_p % 2 == 0:
        raise ValueError(f"N' must be an odd positive integer, got {n_p}")
    half = (int(n_p) - 1) // 2
    return SubspaceSpec(Family.R2, half, alpha_p + half, s_p - 1)


def parameter_map_error(alpha_p: float, s_p: float, n_p: int, ts) -> float:
    """Pointwise mismatch between mapped-R2 and R3 generators on the R3 basis.

    Both differential operators are applied to every ``1F1(alpha'+n; s')``
    and compared at each sample ``t``; returns the largest relative error.
    """
    r2 = parameter_map_r2_to_r3(alpha_p, s_p, n_p)
    r3 = SubspaceSpec(Family.R3, n_p, alpha_p, s_p)
    ops2 = differential_operators(r2)
    ops3 = differential_operators(r3)
    ts = np.asarray(ts, dtype=float)
    worst = 0.0
    for bf in basis_order(r3):
        for key in ("minus", "plus"):
            via_r2 = apply_operator(*ops2[key], bf, ts)
            via_r3 = apply_operator(*ops3[key], bf, ts)
            scale = np.maximum(np.abs(via_r3), np.finfo(float).tiny)
            worst = max(worst, float(np.max(np.abs(via_r2 - via_r3) / scale)))
    return worst
