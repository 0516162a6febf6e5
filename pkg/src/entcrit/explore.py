"""Monte-Carlo audits, violation search and the large-j (large-k) limit study.

Every random draw comes from ``rng_stream(seed, index)``, so results do not
depend on the number of worker threads: tasks are keyed by index and merged
in index order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from . import ops
from .criteria import DEFAULT_TOL, CriterionReport, NumericalError
from .simplex import nelder_mead
from .space import CompositeSpace, ModeSpec
from .states import QuantumState, from_spec, rng_stream

Criterion = Callable[[QuantumState], CriterionReport]

RECOMPUTE_TOL = 1e-12


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _criterion_id(criterion) -> str:
    return getattr(criterion, "criterion_id", getattr(criterion, "__name__", "criterion"))


# --- audits -----------------------------------------------------------------

@dataclass
class AuditReport:
    criterion_id: str
    samples: int
    violations: int
    min_margin: float
    seed: int
    elapsed: float
    tolerance: float = DEFAULT_TOL
    margins: list[float] = field(default_factory=list, repr=False)

    def to_json(self, include_margins: bool = False) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "margins"}
        if include_margins:
            out["margins"] = list(self.margins)
        return out


def make_sampler(space: CompositeSpace, spec: dict) -> Callable[[np.random.Generator], QuantumState]:
    """Turn a JSON state description into ``rng -> state``."""
    spec = dict(spec)
    return lambda rng: from_spec(space, spec, rng)


def mc_audit(
    criterion: Criterion,
    sampler,
    n_samples: int,
    seed: int,
    tolerance: float = DEFAULT_TOL,
    threads: int = 1,
    space: CompositeSpace | None = None,
) -> AuditReport:
    """Evaluate ``criterion`` on ``n_samples`` states drawn by ``sampler``.

    ``sampler`` is either ``rng -> QuantumState`` or a state spec dict (then
    ``space`` is required). Sample ``i`` uses ``rng_stream(seed, i)``. A
    violation is a margin below ``-tolerance``.
    """
    return mc_audit_many([criterion], sampler, n_samples, seed, tolerance, threads, space)[0]


def mc_audit_many(
    criteria: Sequence[Criterion],
    sampler,
    n_samples: int,
    seed: int,
    tolerance: float = DEFAULT_TOL,
    threads: int = 1,
    space: CompositeSpace | None = None,
) -> list[AuditReport]:
    """Like :func:`mc_audit`, evaluating several criteria on the same samples."""
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    if isinstance(sampler, dict):
        if space is None:
            raise ValueError("a sampler spec needs the space it samples on")
        sampler = make_sampler(space, sampler)

    def one(i: int) -> list[float]:
        state = sampler(rng_stream(seed, i))
        if space is not None and state.space != space:
            raise ValueError(f"sample {i} lives on a different space than the audit")
        return [c(state).margin for c in criteria]

    start = time.perf_counter()
    table = _map(one, range(n_samples), threads)
    elapsed = time.perf_counter() - start
    reports = []
    for k, criterion in enumerate(criteria):
        margins = [row[k] for row in table]
        reports.append(AuditReport(
            criterion_id=_criterion_id(criterion),
            samples=n_samples,
            violations=sum(m < -tolerance for m in margins),
            min_margin=min(margins) if margins else float("nan"),
            seed=seed,
            elapsed=elapsed,
            tolerance=tolerance,
            margins=margins,
        ))
    return reports


# --- violation search -------------------------------------------------------

@dataclass(frozen=True)
class OptConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    tol: float = 1e-8
    max_iter: int = 2000
    restarts: int = 16
    initial_step: float = 0.1  # fraction of each box width

    @classmethod
    def from_json(cls, data: dict | None) -> "OptConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown optimizer settings {sorted(unknown)}")
        return cls(**data)


@dataclass
class OptResult:
    best_params: list[float]
    best_margin: float
    iterations: int
    restarts_used: int
    converged: bool
    restart_margins: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def maximize_violation(
    criterion: Criterion,
    family: Callable[[np.ndarray], QuantumState],
    bounds: Sequence[tuple[float, float]],
    config: OptConfig | None = None,
    seed: int = 0,
    threads: int = 1,
) -> OptResult:
    """Minimise the criterion margin over a box-parameterised family of states.

    Restart ``r`` starts from a uniform point of the box drawn from
    ``rng_stream(seed, r)``. The best result is re-evaluated and must agree
    with the optimiser's value to ``1e-12``; otherwise ``NumericalError``.
    """
    config = config or OptConfig()
    box = np.asarray(bounds, dtype=float).reshape(-1, 2)
    lo, hi = box[:, 0], box[:, 1]
    if np.any(hi < lo):
        raise ValueError("each bound needs lo <= hi")
    if config.restarts < 1:
        raise ValueError("need at least one restart")
    step = config.initial_step * (hi - lo)
    step = np.where(step > 0, step, config.initial_step)

    def margin(x):
        return criterion(family(x)).margin

    def run(r: int):
        x0 = rng_stream(seed, r).uniform(lo, hi)
        return nelder_mead(
            margin, x0, step, bounds=(lo, hi),
            reflection=config.reflection, expansion=config.expansion,
            contraction=config.contraction, shrink=config.shrink,
            tol=config.tol, max_iter=config.max_iter,
        )

    runs = _map(run, range(config.restarts), threads)
    best = min(runs, key=lambda res: res.fun)  # first minimum wins ties
    again = margin(best.x)
    if abs(again - best.fun) > RECOMPUTE_TOL:
        raise NumericalError(f"margin at the optimum recomputes to {again!r}, optimiser reported {best.fun!r}")
    return OptResult(
        best_params=[float(v) for v in best.x],
        best_margin=float(best.fun),
        iterations=best.iterations,
        restarts_used=len(runs),
        converged=best.converged,
        restart_margins=[float(res.fun) for res in runs],
    )


# --- large-j / large-k limit ------------------------------------------------

LIMIT_COLUMNS = ("err_x", "err_corr", "err_z", "err_single")


@dataclass
class LimitStudy:
    """Deviations of the scaled su(2)/su(1,1) operators from their bosonic limits.

    ``rows[i]`` holds the deviations for ``values[i]``; ``ratios[i]`` compares
    ``values[i+1]`` with ``values[i]`` and is ``None`` unless the value doubled.
    """

    kind: str
    probe_max: int
    values: list[float]
    rows: list[dict]
    ratios: list[dict | None]

    def to_json(self) -> dict:
        return asdict(self)

    def monotone(self) -> bool:
        return all(
            b[c] <= a[c] for a, b in zip(self.rows, self.rows[1:]) for c in LIMIT_COLUMNS
        )


def _limit_row(kind: str, value: float, probe_max: int, carrier, bosons) -> dict:
    two = int(round(2 * value))
    if two != 2 * value or two <= 0:
        raise ValueError(f"{value!r} is not a positive half-integer")
    if kind == "su2":
        if two < probe_max:
            raise ValueError(f"j={value} has only {two + 1} levels; probes need {probe_max + 1}")
        mode = ModeSpec.spin(value)
        build = ops.su2_from_locals
    else:
        mode = ModeSpec.su11(value, probe_max + 1)
        build = ops.su11_from_locals
    # the probe block of the ladder matrices is exact: each family member moves
    # every mode by at most one level, so no element inside the block needs
    # levels beyond it
    down = ops.lowering(mode)[: probe_max + 1, : probe_max + 1]
    up = down.T.copy()
    levels, lx, hz, corr = bosons
    fam = build(carrier, [up] * 3, [down] * 3, levels, [two] * 3)
    scale = float(two) ** 3  # (2j)^3 = 8 j_a j_b j_c for equal spins
    x_member, corr_member, z_member = fam[0], fam[6], fam[5]
    single = up[2, 1] / np.sqrt(two) if probe_max >= 2 else up[1, 0] / np.sqrt(two)
    single_ref = np.sqrt(2.0) if probe_max >= 2 else 1.0
    return {
        "value": value,
        "err_x": float(np.max(np.abs(x_member.data / np.sqrt(scale) - lx.data))),
        "err_corr": float(np.max(np.abs(corr_member.data / scale - corr))),
        "err_z": float(np.max(np.abs(z_member.data / scale - hz.data))),
        "err_single": float(abs(single - single_ref)),
    }


def hp_limit_study(kind: str, values: Sequence[float], probe_max: int = 2) -> LimitStudy:
    """Compare scaled three-mode su(2) (``kind="su2"``) or su(1,1) operators with bosons.

    For each ``j`` (or ``k``) in ``values`` the x member of the (+,+,-)
    family is scaled by ``1/sqrt(8 j^3)`` and compared with ``L_x``; the
    correction operator and the z member of the (+,+,+) family are scaled by
    ``1/(8 j^3)`` and compared with ``N_a + N_b + 1`` and ``H_z``. Deviations
    are maximum absolute matrix-element differences over basis states with at
    most ``probe_max`` quanta in every mode. ``err_single`` tracks
    ``<2|J+/sqrt(2j)|1>`` against ``sqrt(2)``.
    """
    if kind not in ("su2", "su11"):
        raise ValueError(f"kind must be 'su2' or 'su11', not {kind!r}")
    if probe_max < 1:
        raise ValueError("probe_max must be at least 1")
    values = [float(v) for v in values]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("values must be strictly increasing")
    carrier = CompositeSpace.bosons(3, probe_max)
    levels = [carrier.levels[:, i].astype(float) for i in range(3)]
    downs = [ops.lowering(m) for m in carrier.modes]
    ups = [d.T.copy() for d in downs]
    lx = ops.boson_L_from_locals(carrier, 3, ups, downs, levels).x
    hz = ops.boson_H_from_locals(carrier, ups, downs, levels).z
    corr = np.diag(levels[0] + levels[1] + 1)
    rows = [_limit_row(kind, v, probe_max, carrier, (levels, lx, hz, corr)) for v in values]
    ratios = []
    for a, b in zip(rows, rows[1:]):
        if b["value"] == 2 * a["value"]:
            ratios.append({c: (b[c] / a[c] if a[c] else float("nan")) for c in LIMIT_COLUMNS})
        else:
            ratios.append(None)
    return LimitStudy(kind, probe_max, values, rows, ratios)
