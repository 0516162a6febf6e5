"""Single-mode ladder matrices and the composite operator families.

All ladder matrices are real in the level basis, so transposing a mode maps
its raising operator onto its lowering operator exactly. The x/y members of
each family are assembled from embedded ladder factors multiplied in mode
order; the z members and the correction operators are diagonal and built
from integer (or half-integer) polynomials in the level numbers, which keeps
them free of truncation error.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .space import BOSON, SPIN, SU11, CompositeSpace, ModeSpec, OperatorMatrix

SQRT2 = np.sqrt(2.0)


# --- single-mode matrices ---------------------------------------------------

def lowering(mode: ModeSpec) -> np.ndarray:
    """Lowering operator ``a``, ``J_-`` or ``K_-`` in the level basis."""
    n = np.arange(1, mode.dim, dtype=float)
    if mode.kind == BOSON:
        elems = n
    elif mode.kind == SPIN:
        elems = n * (mode.two_j - n + 1)
    else:
        elems = n * (mode.two_k + n - 1)
    return np.diag(np.sqrt(elems), k=1).astype(complex)


def raising(mode: ModeSpec) -> np.ndarray:
    return lowering(mode).T.copy()


def number_op(mode: ModeSpec) -> np.ndarray:
    """``diag(0, 1, ..., dim-1)``: N, J_z + j or K_z - k depending on the kind."""
    return np.diag(np.arange(mode.dim, dtype=float)).astype(complex)


def z_op(mode: ModeSpec) -> np.ndarray:
    """``J_z`` (spin) or ``K_z`` (su11)."""
    levels = np.arange(mode.dim, dtype=float)
    if mode.kind == SPIN:
        return np.diag(levels - mode.two_j / 2).astype(complex)
    if mode.kind == SU11:
        return np.diag(levels + mode.two_k / 2).astype(complex)
    raise ValueError("z_op is defined for spin and su11 modes only")


def quadratures(mode: ModeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum ``x = (a + a†)/√2``, ``p = (a - a†)/(i√2)``."""
    if mode.kind != BOSON:
        raise ValueError("quadratures need a boson mode")
    a = lowering(mode)
    return (a + a.T) / SQRT2, (a - a.T) * (-1j / SQRT2)


def embed(op: np.ndarray, mode_index: int, space: CompositeSpace) -> OperatorMatrix:
    """Place a single-mode matrix on mode ``mode_index`` (1-based), identity elsewhere."""
    mode_index = space.check_mode_index(mode_index)
    op = np.asarray(op, dtype=complex)
    d = space.dims[mode_index - 1]
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match mode dimension {d}")
    left = int(np.prod(space.dims[: mode_index - 1]))
    right = int(np.prod(space.dims[mode_index:]))
    return OperatorMatrix(space, np.kron(np.kron(np.eye(left), op), np.eye(right)))


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b - b @ a


def anticommutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b + b @ a


# --- helpers ----------------------------------------------------------------

def _require(space: CompositeSpace, kind: str, count: int | None = None, minimum: int | None = None):
    bad = [i + 1 for i, m in enumerate(space.modes) if m.kind != kind]
    if bad:
        raise ValueError(f"modes {bad} are not of kind {kind!r}")
    if count is not None and space.n_modes != count:
        raise ValueError(f"expected exactly {count} {kind} modes, got {space.n_modes}")
    if minimum is not None and space.n_modes < minimum:
        raise ValueError(f"expected at least {minimum} {kind} modes, got {space.n_modes}")


def ladder_product(space: CompositeSpace, factors: Sequence[tuple[int, np.ndarray]]) -> OperatorMatrix:
    """Product of embedded single-mode matrices, multiplied left to right."""
    out = None
    for mode_index, mat in factors:
        term = embed(mat, mode_index, space)
        out = term if out is None else out @ term
    return out


def hermitian_pair(space, up, down) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``(X + Y)/2`` and ``(X - Y)/(2i)`` for a monomial ``X`` and its adjoint ``Y``.

    ``up`` and ``down`` are the factor lists of ``X`` and ``Y``; passing both
    keeps the float products in the same order so ``Y`` is exactly ``X†``.
    """
    x = ladder_product(space, up)
    y = ladder_product(space, down)
    return 0.5 * (x + y), -0.5j * (x - y)


def _levels(space: CompositeSpace) -> list[np.ndarray]:
    return [space.levels[:, i].astype(float) for i in range(space.n_modes)]


def _diag(space, values) -> OperatorMatrix:
    return OperatorMatrix.diag(space, values)


def _target(space: CompositeSpace, target: int | None) -> int:
    return space.n_modes if target is None else space.check_mode_index(target)


class Triple(NamedTuple):
    x: OperatorMatrix
    y: OperatorMatrix
    z: OperatorMatrix


class BosonAux(NamedTuple):
    m_plus: OperatorMatrix
    n_plus: OperatorMatrix
    correction: OperatorMatrix


class SU2Families(NamedTuple):
    Ax: OperatorMatrix
    Ay: OperatorMatrix
    Az: OperatorMatrix
    Bx: OperatorMatrix
    By: OperatorMatrix
    Bz: OperatorMatrix
    E: OperatorMatrix


class SU11Families(NamedTuple):
    Cx: OperatorMatrix
    Cy: OperatorMatrix
    Cz: OperatorMatrix
    Dx: OperatorMatrix
    Dy: OperatorMatrix
    Dz: OperatorMatrix
    F: OperatorMatrix


class Duan(NamedTuple):
    u: OperatorMatrix
    v: OperatorMatrix
    bound: float


# --- bosonic families -------------------------------------------------------

def boson_L_from_locals(space, target, ups, downs, levels) -> Triple:
    """L-family on ``space`` from per-mode raising/lowering matrices and level arrays."""
    others = [i for i in range(1, space.n_modes + 1) if i != target]
    up = [(i, ups[i - 1]) for i in others] + [(target, downs[target - 1])]
    down = [(i, downs[i - 1]) for i in others] + [(target, ups[target - 1])]
    lx, ly = hermitian_pair(space, up, down)
    nt = levels[target - 1]
    prod_n = np.prod([levels[i - 1] for i in others], axis=0)
    prod_n1 = np.prod([levels[i - 1] + 1 for i in others], axis=0)
    lz = 0.5 * ((nt + 1) * prod_n - nt * prod_n1)
    return Triple(lx, ly, _diag(space, lz))


def boson_H_from_locals(space, ups, downs, levels) -> Triple:
    n = space.n_modes
    up = [(i, ups[i - 1]) for i in range(1, n + 1)]
    down = [(i, downs[i - 1]) for i in range(1, n + 1)]
    hx, hy = hermitian_pair(space, up, down)
    hz = 0.5 * (np.prod(levels, axis=0) - np.prod([v + 1 for v in levels], axis=0))
    return Triple(hx, hy, _diag(space, hz))


def _boson_locals(space):
    downs = [lowering(m) for m in space.modes]
    ups = [d.T.copy() for d in downs]
    return ups, downs, _levels(space)


@lru_cache(maxsize=64)
def build_boson_L(space: CompositeSpace, target: int | None = None) -> Triple:
    """L-family coupling every other mode's creation to the target's annihilation.

    ``target`` defaults to the last mode.
    """
    _require(space, BOSON, minimum=2)
    return boson_L_from_locals(space, _target(space, target), *_boson_locals(space))


@lru_cache(maxsize=64)
def build_boson_H(space: CompositeSpace) -> Triple:
    _require(space, BOSON, minimum=2)
    return boson_H_from_locals(space, *_boson_locals(space))


def boson_correction(levels: Sequence[np.ndarray], target: int) -> np.ndarray:
    """``prod(N_i + 1) - prod(N_i)`` over all modes except ``target`` (1-based)."""
    rest = [v for i, v in enumerate(levels, start=1) if i != target]
    return np.prod([v + 1 for v in rest], axis=0) - np.prod(rest, axis=0)


@lru_cache(maxsize=64)
def build_aux_boson(space: CompositeSpace, target: int | None = None) -> BosonAux:
    """``M+`` (pairwise products of numbers), ``N+`` (total number) and the correction.

    For three modes and the default target the correction is ``N_a + N_b + 1``.
    """
    _require(space, BOSON, minimum=2)
    t = _target(space, target)
    lv = _levels(space)
    m_plus = sum(lv[i] * lv[j] for i in range(len(lv)) for j in range(i + 1, len(lv)))
    return BosonAux(_diag(space, m_plus), _diag(space, sum(lv)), _diag(space, boson_correction(lv, t)))


# --- su(2) and su(1,1) ------------------------------------------------------

def su2_diagonals(levels, two_j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``A_z``, ``B_z`` and ``E`` as functions of the spin number levels."""
    def pm(n, tj):  # J+ J-
        return n * (tj - n + 1)

    def mp(n, tj):  # J- J+
        return (n + 1) * (tj - n)

    (na, nb, nc), (ta, tb, tc) = levels, two_j
    az = 0.5 * (pm(na, ta) * pm(nb, tb) * mp(nc, tc) - mp(na, ta) * mp(nb, tb) * pm(nc, tc))
    bz = 0.5 * (pm(na, ta) * pm(nb, tb) * pm(nc, tc) - mp(na, ta) * mp(nb, tb) * mp(nc, tc))
    e = 2 * (nc - tc / 2) * (pm(na, ta) * pm(nb, tb) - mp(na, ta) * mp(nb, tb))
    return az, bz, e


def su11_diagonals(levels, two_k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``C_z``, ``D_z`` and ``F`` as functions of the su(1,1) levels."""
    def pm(m, tk):  # K+ K-
        return m * (tk + m - 1)

    def mp(m, tk):  # K- K+
        return (m + 1) * (tk + m)

    (ma, mb, mc), (ta, tb, tc) = levels, two_k
    cz = 0.5 * (pm(ma, ta) * pm(mb, tb) * mp(mc, tc) - mp(ma, ta) * mp(mb, tb) * pm(mc, tc))
    dz = 0.5 * (pm(ma, ta) * pm(mb, tb) * pm(mc, tc) - mp(ma, ta) * mp(mb, tb) * mp(mc, tc))
    f = 2 * (mc + tc / 2) * (mp(ma, ta) * mp(mb, tb) - pm(ma, ta) * pm(mb, tb))
    return cz, dz, f


def _tripartite_xy(space, ups, downs):
    """x/y pairs for the ``(+,+,-)`` monomial and the ``(+,+,+)`` monomial."""
    cross = hermitian_pair(
        space,
        [(1, ups[0]), (2, ups[1]), (3, downs[2])],
        [(1, downs[0]), (2, downs[1]), (3, ups[2])],
    )
    full = hermitian_pair(
        space,
        [(1, ups[0]), (2, ups[1]), (3, ups[2])],
        [(1, downs[0]), (2, downs[1]), (3, downs[2])],
    )
    return cross, full


def su2_from_locals(space, ups, downs, levels, two_j) -> SU2Families:
    (ax, ay), (bx, by) = _tripartite_xy(space, ups, downs)
    az, bz, e = su2_diagonals(levels, two_j)
    return SU2Families(ax, ay, _diag(space, az), bx, by, _diag(space, bz), _diag(space, e))


def su11_from_locals(space, ups, downs, levels, two_k) -> SU11Families:
    (cx, cy), (dx, dy) = _tripartite_xy(space, ups, downs)
    cz, dz, f = su11_diagonals(levels, two_k)
    return SU11Families(cx, cy, _diag(space, cz), dx, dy, _diag(space, dz), _diag(space, f))


@lru_cache(maxsize=32)
def build_su2_families(space: CompositeSpace) -> SU2Families:
    """A-family (``J+ J+ J-``), B-family (``J+ J+ J+``) and ``E`` on three spins."""
    _require(space, SPIN, count=3)
    downs = [lowering(m) for m in space.modes]
    ups = [d.T.copy() for d in downs]
    return su2_from_locals(space, ups, downs, _levels(space), [m.two_j for m in space.modes])


@lru_cache(maxsize=32)
def build_su11_families(space: CompositeSpace) -> SU11Families:
    """C-family (``K+ K+ K-``), D-family (``K+ K+ K+``) and ``F`` on three su(1,1) modes."""
    _require(space, SU11, count=3)
    downs = [lowering(m) for m in space.modes]
    ups = [d.T.copy() for d in downs]
    return su11_from_locals(space, ups, downs, _levels(space), [m.two_k for m in space.modes])


def ladder_z(space: CompositeSpace, cross: bool) -> OperatorMatrix:
    """``(X X† - X† X)/2`` from ladder products, for checking the diagonal z forms.

    ``cross=True`` uses the ``(+,+,-)`` monomial (A/C families), otherwise
    ``(+,+,+)`` (B/D families). Only exact inside a safe projector for
    truncated kinds.
    """
    downs = [embed(lowering(m), i, space) for i, m in enumerate(space.modes, start=1)]
    ups = [d.dag() for d in downs]
    last_up, last_down = (downs[2], ups[2]) if cross else (ups[2], downs[2])
    xxd = (ups[0] @ downs[0]) @ (ups[1] @ downs[1]) @ (last_up @ last_down)
    xdx = (downs[0] @ ups[0]) @ (downs[1] @ ups[1]) @ (last_down @ last_up)
    return 0.5 * (xxd - xdx)


# --- Duan quadratures -------------------------------------------------------

@lru_cache(maxsize=16)
def build_duan(space: CompositeSpace, a_param: float) -> Duan:
    """``u = |a| x1 + x2/a``, ``v = |a| p1 - p2/a`` and the bound ``a² + 1/a²``."""
    _require(space, BOSON, count=2)
    a_param = float(a_param)
    if a_param == 0 or not np.isfinite(a_param):
        raise ValueError("a_param must be a nonzero finite real")
    x1, p1 = (embed(m, 1, space) for m in quadratures(space.modes[0]))
    x2, p2 = (embed(m, 2, space) for m in quadratures(space.modes[1]))
    u = abs(a_param) * x1 + (1 / a_param) * x2
    v = abs(a_param) * p1 - (1 / a_param) * p2
    return Duan(u, v, a_param**2 + 1 / a_param**2)
