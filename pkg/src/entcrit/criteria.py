"""Moments and separability inequalities built on uncertainty relations.

Each criterion returns a :class:`CriterionReport` whose ``margin`` is
``lhs - rhs``. Separable states always give ``margin >= 0``; a margin below
``-tolerance`` certifies entanglement across the stated partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np

from . import ops
from .ptrans import partial_transpose
from .space import BOSON, SPIN, SU11, CompositeSpace, OperatorMatrix, guard_degree, safe_projector
from .states import QuantumState

DEFAULT_TOL = 1e-9
CLAMP_TOL = 1e-12
COMMUTATOR_TOL = 1e-10


class NumericalError(ArithmeticError):
    """A computed quantity left its mathematically allowed range."""


class Verdict(str, Enum):
    DETECTED = "Detected"
    NOT_DETECTED = "NotDetected"


@dataclass(frozen=True)
class CriterionReport:
    criterion_id: str
    lhs: float
    rhs: float
    moments: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOL
    flags: tuple[str, ...] = ()
    margin: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lhs", float(self.lhs))
        object.__setattr__(self, "rhs", float(self.rhs))
        object.__setattr__(self, "margin", self.lhs - self.rhs)

    @property
    def verdict(self) -> Verdict:
        return Verdict.DETECTED if self.margin < -self.tolerance else Verdict.NOT_DETECTED

    @property
    def detected(self) -> bool:
        return self.verdict is Verdict.DETECTED

    def to_json(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "verdict": self.verdict.value,
            "tolerance": self.tolerance,
            "moments": {k: float(v) for k, v in self.moments.items()},
            "flags": list(self.flags),
        }


# --- moments ----------------------------------------------------------------

def expectation(x: OperatorMatrix, state: QuantumState) -> complex:
    return state.expect(x)


def _clamp(value: float, scale: float, name: str, flags: list | None) -> float:
    if value >= 0:
        return value
    if value < -CLAMP_TOL * max(1.0, scale):
        raise NumericalError(f"variance of {name} is {value!r}")
    if flags is not None:
        flags.append(f"clamped:{name}")
    return 0.0


def _variance(state, x, x2, name="X", flags=None) -> tuple[float, float]:
    """Return ``(variance, mean)`` using a precomputed square ``x2``."""
    mean = state.expect(x).real
    second = state.expect(x2).real
    return _clamp(second - mean**2, abs(second), name, flags), mean


def variance(x: OperatorMatrix, state: QuantumState) -> float:
    """``<X²> - <X>²``; tiny negative round-off is clamped to zero."""
    return _variance(state, x, x @ x, "X")[0]


def covariance(x: OperatorMatrix, y: OperatorMatrix, state: QuantumState) -> float:
    """``<(XY + YX)/2> - <X><Y>``."""
    sym = 0.5 * ops.anticommutator(x, y)
    return state.expect(sym).real - state.expect(x).real * state.expect(y).real


@dataclass(frozen=True)
class _Pair:
    """An observable pair with the products needed for its second moments."""

    x: OperatorMatrix
    y: OperatorMatrix
    x2: OperatorMatrix
    y2: OperatorMatrix
    sym: OperatorMatrix

    @classmethod
    def of(cls, x, y) -> "_Pair":
        return cls(x, y, x @ x, y @ y, 0.5 * ops.anticommutator(x, y))

    def moments(self, state, names=("X", "Y"), flags=None):
        vx, mx = _variance(state, self.x, self.x2, names[0], flags)
        vy, my = _variance(state, self.y, self.y2, names[1], flags)
        cov = state.expect(self.sym).real - mx * my
        return vx, vy, cov, mx, my


def _dmean(diag: np.ndarray, state: QuantumState) -> float:
    """Expectation of a real diagonal operator given by its diagonal."""
    if state.is_pure:
        return float(np.dot(diag, np.abs(state.vector) ** 2))
    return float(np.dot(diag, np.diagonal(state.matrix).real))


def _check_space(state: QuantumState, kind: str, count: int | None = None, minimum: int | None = None):
    space = state.space
    if any(m.kind != kind for m in space.modes):
        raise ValueError(f"criterion needs {kind} modes only")
    if count is not None and space.n_modes != count:
        raise ValueError(f"criterion needs exactly {count} modes, got {space.n_modes}")
    if minimum is not None and space.n_modes < minimum:
        raise ValueError(f"criterion needs at least {minimum} modes, got {space.n_modes}")


# --- generic relations ------------------------------------------------------

def check_commutator(a: OperatorMatrix, b: OperatorMatrix, c: OperatorMatrix, degree: int = 2) -> float:
    """Raise ``ValueError`` unless ``[A, B] = iC`` inside the safe projector; return the deviation."""
    space = a.space
    p = safe_projector(space, guard_degree(space, degree))
    dev = (p @ (ops.commutator(a, b) - 1j * c) @ p).max_abs()
    if dev > COMMUTATOR_TOL * max(1.0, c.max_abs()):
        raise ValueError(f"operators do not satisfy [A, B] = iC (deviation {dev:.3g})")
    return dev


def srir_margin(a, b, c, state: QuantumState, tolerance: float = DEFAULT_TOL, check: bool = False) -> CriterionReport:
    """``Var(A) Var(B) - |<C>|²/4 - Cov(A, B)²``; non-negative for every state."""
    if check:
        check_commutator(a, b, c)
    flags: list[str] = []
    va, vb, cov, ma, mb = _Pair.of(a, b).moments(state, ("A", "B"), flags)
    mc = state.expect(c)
    rhs = 0.25 * abs(mc) ** 2 + cov**2
    moments = {"var_A": va, "var_B": vb, "cov_AB": cov, "mean_A": ma, "mean_B": mb, "abs_mean_C": abs(mc)}
    return CriterionReport("srir", va * vb, rhs, moments, tolerance, tuple(flags))


def _pt_moments(a, b, c, state, subset):
    pt = lambda op: partial_transpose(op, subset)  # noqa: E731
    ma = state.expect(pt(a)).real
    mb = state.expect(pt(b)).real
    va = state.expect(pt(a @ a)).real - ma**2
    vb = state.expect(pt(b @ b)).real - mb**2
    cov = 0.5 * state.expect(pt(ops.anticommutator(a, b))).real - ma * mb
    mc = state.expect(pt(c))
    return {"pt_var_A": va, "pt_var_B": vb, "pt_cov_AB": cov, "pt_mean_A": ma, "pt_mean_B": mb, "abs_pt_mean_C": abs(mc)}


def pt_product_criterion(
    a, b, c, state: QuantumState, subset, tolerance: float = DEFAULT_TOL, check: bool = True
) -> CriterionReport:
    """Product-form inequality with every moment taken of the partially transposed operators.

    The "variances" here are moments of ``rho^{T_S}`` and may be negative
    for entangled states, so they are not clamped.
    """
    if check:
        check_commutator(a, b, c)
    m = _pt_moments(a, b, c, state, subset)
    lhs = m["pt_var_A"] * m["pt_var_B"]
    rhs = 0.25 * m["abs_pt_mean_C"] ** 2 + m["pt_cov_AB"] ** 2
    return CriterionReport("pt_product", lhs, rhs, m, tolerance)


def pt_sum_criterion(
    a, b, c, c_param: float, state: QuantumState, subset, tolerance: float = DEFAULT_TOL, check: bool = True
) -> CriterionReport:
    """Sum form ``V_A + c² V_B >= c sqrt(|<C^T>|² + 4 Cov²)`` on transposed moments."""
    if not c_param > 0:
        raise ValueError("c_param must be positive")
    if check:
        check_commutator(a, b, c)
    m = _pt_moments(a, b, c, state, subset)
    lhs = m["pt_var_A"] + c_param**2 * m["pt_var_B"]
    rhs = c_param * math.sqrt(m["abs_pt_mean_C"] ** 2 + 4 * m["pt_cov_AB"] ** 2)
    return CriterionReport("pt_sum", lhs, rhs, {**m, "c": c_param}, tolerance)


# --- three boson modes ------------------------------------------------------

@dataclass(frozen=True)
class _BosonBundle:
    pair: _Pair
    correction: np.ndarray
    m_plus: np.ndarray
    n_plus: np.ndarray
    n_target: np.ndarray
    shifted_product: np.ndarray  # prod(N_i + 1) - prod(N_i) over all modes


@lru_cache(maxsize=32)
def _boson_bundle(space: CompositeSpace, target: int) -> _BosonBundle:
    lx, ly, _ = ops.build_boson_L(space, target)
    aux = ops.build_aux_boson(space, target)
    lv = [space.levels[:, i].astype(float) for i in range(space.n_modes)]
    shifted = np.prod([v + 1 for v in lv], axis=0) - np.prod(lv, axis=0)
    return _BosonBundle(
        _Pair.of(lx, ly),
        aux.correction.diagonal().real,
        aux.m_plus.diagonal().real,
        aux.n_plus.diagonal().real,
        lv[target - 1],
        shifted,
    )


def _boson3_moments(state, flags):
    _check_space(state, BOSON, count=3)
    bundle = _boson_bundle(state.space, 3)
    vx, vy, cov, mx, my = bundle.pair.moments(state, ("L_x", "L_y"), flags)
    return bundle, {
        "var_Lx": vx,
        "var_Ly": vy,
        "cov_LxLy": cov,
        "mean_Lx": mx,
        "mean_Ly": my,
        "mean_correction": _dmean(bundle.correction, state),
        "mean_Mplus": _dmean(bundle.m_plus, state),
        "mean_Nplus": _dmean(bundle.n_plus, state),
    }


def boson3_product(state: QuantumState, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """AB|C product inequality for three boson modes.

    ``[Var(L_x) + <N_a+N_b+1>/4] [Var(L_y) + <N_a+N_b+1>/4]``
    against ``(<M+> + <N+> + 1)²/16 + Cov(L_x, L_y)²``.
    """
    flags: list[str] = []
    _, m = _boson3_moments(state, flags)
    q = 0.25 * m["mean_correction"]
    lhs = (m["var_Lx"] + q) * (m["var_Ly"] + q)
    rhs = (m["mean_Mplus"] + m["mean_Nplus"] + 1) ** 2 / 16 + m["cov_LxLy"] ** 2
    return CriterionReport("boson3_product", lhs, rhs, m, tolerance, tuple(flags))


def boson3_sum(state: QuantumState, c_param: float = 1.0, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """Sum form with weight ``c``; at ``c = 1`` this is the variance-sum inequality.

    Moments ``lhs_c1_form``/``rhs_c1_form`` carry the rearranged sides
    ``Var(L_x) + c² Var(L_y)`` and ``c sqrt(...) - (1+c²)<N_a+N_b+1>/4``.
    """
    if not c_param > 0:
        raise ValueError("c_param must be positive")
    flags: list[str] = []
    _, m = _boson3_moments(state, flags)
    c2 = c_param**2
    shift = 0.25 * (1 + c2) * m["mean_correction"]
    root = c_param * math.sqrt(0.25 * (m["mean_Mplus"] + m["mean_Nplus"] + 1) ** 2 + 4 * m["cov_LxLy"] ** 2)
    lhs = m["var_Lx"] + c2 * m["var_Ly"] + shift
    m.update(c=c_param, lhs_c1_form=m["var_Lx"] + c2 * m["var_Ly"], rhs_c1_form=root - shift)
    return CriterionReport("boson3_sum", lhs, root, m, tolerance, tuple(flags))


def boson3_hur(state: QuantumState, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """Covariance-free variant: ``Var(L_x) + Var(L_y) >= <M+ + N_c>/2``."""
    flags: list[str] = []
    bundle, m = _boson3_moments(state, flags)
    m["mean_Nc"] = _dmean(bundle.n_target, state)
    rhs = 0.5 * (m["mean_Mplus"] + m["mean_Nc"])
    return CriterionReport("boson3_hur", m["var_Lx"] + m["var_Ly"], rhs, m, tolerance, tuple(flags))


def npartite_criterion(state: QuantumState, target: int | None = None, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """One mode against the rest for ``n >= 3`` boson modes (target defaults to the last)."""
    _check_space(state, BOSON, minimum=3)
    t = state.space.n_modes if target is None else state.space.check_mode_index(target)
    bundle = _boson_bundle(state.space, t)
    flags: list[str] = []
    vx, vy, cov, mx, my = bundle.pair.moments(state, ("L_x", "L_y"), flags)
    corr = _dmean(bundle.correction, state)
    shifted = _dmean(bundle.shifted_product, state)
    lhs = (vx + 0.25 * corr) * (vy + 0.25 * corr)
    rhs = shifted**2 / 16 + cov**2
    moments = {
        "var_Lx": vx,
        "var_Ly": vy,
        "cov_LxLy": cov,
        "mean_Lx": mx,
        "mean_Ly": my,
        "mean_correction": corr,
        "mean_shifted_product": shifted,
        "target": t,
    }
    return CriterionReport("nmode_product", lhs, rhs, moments, tolerance, tuple(flags))


# --- su(2) / su(1,1) --------------------------------------------------------

@lru_cache(maxsize=16)
def _algebra_bundle(space: CompositeSpace):
    if space.modes[0].kind == SPIN:
        fam = ops.build_su2_families(space)
    else:
        fam = ops.build_su11_families(space)
    return _Pair.of(fam[0], fam[1]), fam[6].diagonal().real, fam[5].diagonal().real


def _algebra_criterion(state, kind, cid, names, tolerance):
    _check_space(state, kind, count=3)
    pair, corr_diag, z_diag = _algebra_bundle(state.space)
    flags: list[str] = []
    vx, vy, cov, mx, my = pair.moments(state, names[:2], flags)
    corr = _dmean(corr_diag, state)
    z = _dmean(z_diag, state)
    lhs = (vx + 0.25 * corr) * (vy + 0.25 * corr)
    rhs = 0.25 * z**2 + cov**2
    moments = {
        f"var_{names[0]}": vx,
        f"var_{names[1]}": vy,
        f"cov_{names[0]}{names[1]}": cov,
        f"mean_{names[0]}": mx,
        f"mean_{names[1]}": my,
        f"mean_{names[2]}": corr,
        f"mean_{names[3]}": z,
    }
    return CriterionReport(cid, lhs, rhs, moments, tolerance, tuple(flags))


def su2_criterion(state: QuantumState, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """``[Var(A_x) + <E>/4][Var(A_y) + <E>/4] >= <B_z>²/4 + Cov(A_x, A_y)²`` for three spins."""
    return _algebra_criterion(state, SPIN, "su2_product", ("Ax", "Ay", "E", "Bz"), tolerance)


def su11_criterion(state: QuantumState, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """su(1,1) analogue with the C/D families and ``F``."""
    return _algebra_criterion(state, SU11, "su11_product", ("Cx", "Cy", "F", "Dz"), tolerance)


# --- Duan -------------------------------------------------------------------

@lru_cache(maxsize=16)
def _duan_bundle(space: CompositeSpace, a_param: float):
    u, v, bound = ops.build_duan(space, a_param)
    return u, u @ u, v, v @ v, bound


def duan_criterion(state: QuantumState, a_param: float = 1.0, tolerance: float = DEFAULT_TOL) -> CriterionReport:
    """``Var(u) + Var(v) >= a² + 1/a²`` for two boson modes."""
    _check_space(state, BOSON, count=2)
    u, u2, v, v2, bound = _duan_bundle(state.space, float(a_param))
    flags: list[str] = []
    vu, mu = _variance(state, u, u2, "u", flags)
    vv, mv = _variance(state, v, v2, "v", flags)
    moments = {"var_u": vu, "var_v": vv, "mean_u": mu, "mean_v": mv, "a": float(a_param)}
    return CriterionReport("duan", vu + vv, bound, moments, tolerance, tuple(flags))


# --- registry ---------------------------------------------------------------

CRITERIA: dict[str, Callable[..., CriterionReport]] = {
    "boson3_product": boson3_product,
    "boson3_sum": boson3_sum,
    "boson3_hur": boson3_hur,
    "su2_product": su2_criterion,
    "su11_product": su11_criterion,
    "duan": duan_criterion,
    "nmode_product": npartite_criterion,
}

OPERATOR_CRITERIA = ("srir", "pt_product", "pt_sum")

# parameter names accepted in job files, mapped to keyword arguments
PARAM_NAMES = {"c": "c_param", "a": "a_param", "target": "target"}


def get_criterion(criterion_id: str, **params) -> Callable[[QuantumState], CriterionReport]:
    """Bind a built-in criterion to its parameters; returns ``state -> report``."""
    try:
        fn = CRITERIA[criterion_id]
    except KeyError:
        raise ValueError(f"unknown criterion {criterion_id!r}; built-ins are {sorted(CRITERIA)}") from None
    kwargs = {PARAM_NAMES.get(k, k): v for k, v in params.items()}

    def evaluate(state: QuantumState) -> CriterionReport:
        return fn(state, **kwargs)

    evaluate.criterion_id = criterion_id
    return evaluate


def operator_criterion(
    criterion_id: str, a, b, c, subset=None, c_param: float = 1.0, tolerance: float = DEFAULT_TOL, check: bool = True
) -> Callable[[QuantumState], CriterionReport]:
    """Bind one of the generic criteria to a fixed operator triple."""
    if criterion_id not in OPERATOR_CRITERIA:
        raise ValueError(f"unknown operator criterion {criterion_id!r}")
    if criterion_id != "srir" and not subset:
        raise ValueError(f"{criterion_id} needs a non-empty subset of transposed modes")
    if check:
        check_commutator(a, b, c)

    def evaluate(state):
        if criterion_id == "srir":
            return srir_margin(a, b, c, state, tolerance)
        if criterion_id == "pt_product":
            return pt_product_criterion(a, b, c, state, subset, tolerance, check=False)
        return pt_sum_criterion(a, b, c, c_param, state, subset, tolerance, check=False)

    evaluate.criterion_id = criterion_id
    return evaluate
