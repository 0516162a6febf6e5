"""Partial transposition of operators and the family-level transpose identities."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import ops
from .space import BOSON, CompositeSpace, OperatorMatrix, guard_degree, safe_projector


def _subset(space: CompositeSpace, subset: Iterable[int]) -> tuple[int, ...]:
    if isinstance(subset, (int, np.integer)):
        subset = [subset]
    return tuple(sorted({space.check_mode_index(s) for s in subset}))


def transpose_modes(data: np.ndarray, dims: tuple[int, ...], subset: tuple[int, ...]) -> np.ndarray:
    """Swap row/column indices of the (1-based) modes in ``subset``."""
    n = len(dims)
    axes = list(range(2 * n))
    for s in subset:
        i = s - 1
        axes[i], axes[n + i] = n + i, i
    dim = data.shape[0]
    return data.reshape(dims + dims).transpose(axes).reshape(dim, dim)


def partial_transpose(x: OperatorMatrix, subset: Iterable[int]) -> OperatorMatrix:
    """Transpose ``x`` on the modes in ``subset`` (1-based, need not be contiguous).

    ``<i_S i_R| X^{T_S} |j_S j_R> = <j_S i_R| X |i_S j_R>`` in the level basis.
    """
    sub = _subset(x.space, subset)
    if not sub:
        warnings.warn("partial transpose over an empty subset is the identity map", stacklevel=2)
        return x
    return OperatorMatrix(x.space, transpose_modes(x.data, x.space.dims, sub))


def pt_duality_check(x: OperatorMatrix, state, subset) -> tuple[complex, complex]:
    """Return ``(tr(X rho^{T_S}), tr(X^{T_S} rho))``; the two agree for any operator."""
    if state.space != x.space:
        raise ValueError("operator and state live on different spaces")
    sub = _subset(x.space, subset)
    rho = state.density()
    rho_pt = transpose_modes(rho, x.space.dims, sub) if sub else rho
    lhs = np.einsum("ij,ji->", x.data, rho_pt)
    rhs = np.einsum("ij,ji->", partial_transpose(x, sub).data if sub else x.data, rho)
    return complex(lhs), complex(rhs)


@dataclass
class IdentityReport:
    kind: str
    params: dict
    deviations: dict = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_deviation <= tol

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "deviations": self.deviations,
            "max_deviation": self.max_deviation,
        }


def _dev(p: OperatorMatrix, lhs: OperatorMatrix, rhs: OperatorMatrix) -> float:
    return (p @ (lhs - rhs) @ p).max_abs()


def _family_identities(report, p, sub, hi, lo, correction):
    """The five transpose identities linking a (+,+,+) family to a (+,+,-) family.

    ``hi`` and ``lo`` are ``(x, y, z)`` triples, ``correction`` the operator
    that the squares pick up.
    """
    t = lambda op: partial_transpose(op, sub)  # noqa: E731
    hx, hy, hz = hi
    lx, ly, lz = lo
    quarter = 0.25 * correction
    report.deviations.update({
        "x^T = x'": _dev(p, t(hx), lx),
        "y^T = y'": _dev(p, t(hy), ly),
        "z^T = z": _dev(p, t(hz), hz),
        "z'^T = z'": _dev(p, t(lz), lz),
        "(x^2)^T = x'^2 + corr/4": _dev(p, t(hx @ hx), lx @ lx + quarter),
        "(y^2)^T = y'^2 + corr/4": _dev(p, t(hy @ hy), ly @ ly + quarter),
        "{x,y}^T = {x',y'}": _dev(p, t(ops.anticommutator(hx, hy)), ops.anticommutator(lx, ly)),
    })


def verify_pt_identities(kind: str, **params) -> IdentityReport:
    """Check the transpose identities of one operator family numerically.

    ``kind`` is ``"boson3"`` (``cutoff``, default 6), ``"boson_n"`` (``n``,
    default 4, ``cutoff`` default 4), ``"su2"`` (``two_j``, default 2) or
    ``"su11"`` (``two_k``, default 1, ``cutoff`` default 8). Truncated kinds
    are compared inside ``safe_projector(degree)`` with ``degree`` defaulting
    to 2; spin spaces are compared on the full matrices.
    """
    degree = int(params.pop("degree", 2))
    if kind in ("boson3", "boson_n"):
        n = 3 if kind == "boson3" else int(params.pop("n", 4))
        cutoff = int(params.pop("cutoff", 6 if kind == "boson3" else 4))
        space = CompositeSpace.bosons(n, cutoff)
        hi, lo = ops.build_boson_H(space), ops.build_boson_L(space)
        corr = ops.build_aux_boson(space).correction
        used = {"n": n, "cutoff": cutoff, "degree": degree}
    elif kind == "su2":
        two_j = int(params.pop("two_j", 2))
        space = CompositeSpace.spins(3, two_j / 2)
        fam = ops.build_su2_families(space)
        hi, lo, corr = fam[3:6], fam[0:3], fam.E
        used = {"two_j": two_j}
    elif kind == "su11":
        two_k = int(params.pop("two_k", 1))
        cutoff = int(params.pop("cutoff", 8))
        space = CompositeSpace.su11s(3, two_k / 2, cutoff)
        fam = ops.build_su11_families(space)
        hi, lo, corr = fam[3:6], fam[0:3], fam.F
        used = {"two_k": two_k, "cutoff": cutoff, "degree": degree}
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)} for kind {kind!r}")
    p = safe_projector(space, guard_degree(space, degree))
    report = IdentityReport(kind, used)
    _family_identities(report, p, (space.n_modes,), hi, lo, corr)
    if kind == "boson3":
        aux = ops.build_aux_boson(space)
        n_a, n_b = (ops.embed(ops.number_op(m), i, space) for i, m in ((1, space.modes[0]), (2, space.modes[1])))
        report.deviations["corr = N_a + N_b + 1"] = (corr - (n_a + n_b + 1)).max_abs()
        report.deviations["H_z = -(M+ + N+ + 1)/2"] = (hi[2] + 0.5 * (aux.m_plus + aux.n_plus + 1)).max_abs()
    return report


def commutator_suite(kind: str, **params) -> IdentityReport:
    """``[x, y] - i z`` for both families of a kind, plus ladder-product z cross-checks.

    Accepts the same ``kind``/parameter combinations as :func:`verify_pt_identities`.
    """
    degree = int(params.pop("degree", 2))
    report_params = dict(params)
    if kind in ("boson3", "boson_n"):
        n = 3 if kind == "boson3" else int(params.pop("n", 4))
        cutoff = int(params.pop("cutoff", 6 if kind == "boson3" else 4))
        space = CompositeSpace.bosons(n, cutoff)
        families = {"L": ops.build_boson_L(space), "H": ops.build_boson_H(space)}
        ladder = {}
        report_params = {"n": n, "cutoff": cutoff, "degree": degree}
    elif kind == "su2":
        two_j = int(params.pop("two_j", 2))
        space = CompositeSpace.spins(3, two_j / 2)
        fam = ops.build_su2_families(space)
        families = {"A": fam[0:3], "B": fam[3:6]}
        ladder = {"A": ops.ladder_z(space, cross=True), "B": ops.ladder_z(space, cross=False)}
        report_params = {"two_j": two_j}
    elif kind == "su11":
        two_k = int(params.pop("two_k", 1))
        cutoff = int(params.pop("cutoff", 8))
        space = CompositeSpace.su11s(3, two_k / 2, cutoff)
        fam = ops.build_su11_families(space)
        families = {"C": fam[0:3], "D": fam[3:6]}
        ladder = {"C": ops.ladder_z(space, cross=True), "D": ops.ladder_z(space, cross=False)}
        report_params = {"two_k": two_k, "cutoff": cutoff, "degree": degree}
    else:
        raise ValueError(f"unknown commutator kind {kind!r}")
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)} for kind {kind!r}")
    p = safe_projector(space, guard_degree(space, degree))
    report = IdentityReport(kind, report_params)
    for name, (x, y, z) in families.items():
        report.deviations[f"[{name}_x,{name}_y] = i {name}_z"] = _dev(p, ops.commutator(x, y), 1j * z)
        for axis, op in zip("xyz", (x, y, z)):
            report.deviations[f"{name}_{axis} hermitian"] = (op - op.dag()).max_abs()
        if name in ladder:
            report.deviations[f"{name}_z ladder form"] = _dev(p, ladder[name], z)
    if all(m.kind == BOSON for m in space.modes):
        report.deviations["[x,p] = i"] = _dev(
            safe_projector(space, guard_degree(space, 1)),
            ops.commutator(*(ops.embed(q, 1, space) for q in ops.quadratures(space.modes[0]))),
            OperatorMatrix.identity(space) * 1j,
        )
    return report
