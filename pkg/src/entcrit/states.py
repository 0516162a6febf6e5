"""Quantum states, named test states and random ensembles.

Random samplers take an explicit :class:`numpy.random.Generator`; use
:func:`rng_stream` to derive reproducible, independent generators from a
``(seed, stream_index)`` pair.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .space import CompositeSpace, OperatorMatrix

PURE_TOL = 1e-12
HERM_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = -1e-10


def rng_stream(seed: int, stream_index: int = 0) -> np.random.Generator:
    """Generator for stream ``stream_index`` of ``seed``; distinct streams are independent."""
    if seed < 0 or stream_index < 0:
        raise ValueError("seed and stream_index must be non-negative")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream_index),)))


class QuantumState:
    """Pure vector or density matrix on a space.

    Construct through :meth:`pure` or :meth:`mixed`; both validate the
    normalisation invariants and raise ``ValueError`` on violation.
    """

    def __init__(self, space: CompositeSpace, vector=None, matrix=None):
        if (vector is None) == (matrix is None):
            raise ValueError("give exactly one of vector or matrix")
        self.space = space
        self.vector = None if vector is None else np.array(vector, dtype=complex)
        self.matrix = None if matrix is None else np.array(matrix, dtype=complex)
        for arr in (self.vector, self.matrix):
            if arr is not None:
                arr.flags.writeable = False

    @classmethod
    def pure(cls, space: CompositeSpace, vector, normalize: bool = False) -> "QuantumState":
        vec = np.asarray(vector, dtype=complex).ravel()
        if vec.shape != (space.dim,):
            raise ValueError(f"vector length {vec.size} does not match space dim {space.dim}")
        norm = np.linalg.norm(vec)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalise the zero vector")
            vec = vec / norm
        elif abs(norm - 1) > PURE_TOL:
            raise ValueError(f"state vector is not normalised (norm {norm!r})")
        return cls(space, vector=vec)

    @classmethod
    def mixed(cls, space: CompositeSpace, rho, check: bool = True) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (space.dim, space.dim):
            raise ValueError(f"density matrix shape {rho.shape} does not match space dim {space.dim}")
        if check:
            if np.max(np.abs(rho - rho.conj().T)) > HERM_TOL:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(rho)
            if abs(tr - 1) > TRACE_TOL:
                raise ValueError(f"density matrix trace {tr!r} is not 1")
            lowest = np.linalg.eigvalsh(rho)[0]
            if lowest < EIG_TOL:
                raise ValueError(f"density matrix has eigenvalue {lowest!r}")
        return cls(space, matrix=rho)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @cached_property
    def _density(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        rho = np.outer(self.vector, self.vector.conj())
        rho.flags.writeable = False
        return rho

    def density(self) -> np.ndarray:
        return self._density

    def expect(self, op: OperatorMatrix | np.ndarray) -> complex:
        if isinstance(op, OperatorMatrix):
            if op.space != self.space:
                raise ValueError("operator and state live on different spaces")
            op = op.data
        if self.vector is not None:
            return complex(np.vdot(self.vector, op @ self.vector))
        return complex(np.einsum("ij,ji->", op, self.matrix))

    def __repr__(self):
        form = "pure" if self.is_pure else "mixed"
        return f"QuantumState({form}, dim={self.space.dim})"


# --- named states -----------------------------------------------------------

def basis_state(space: CompositeSpace, occ: Sequence[int]) -> QuantumState:
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index_of(occ)] = 1
    return QuantumState.pure(space, vec)


def superpose(space: CompositeSpace, terms: Iterable[tuple[complex, Sequence[int]]]) -> QuantumState:
    """Normalised ``sum amp |occ>``; repeated occupations add up."""
    vec = np.zeros(space.dim, dtype=complex)
    for amp, occ in terms:
        vec[space.index_of(occ)] += amp
    if np.linalg.norm(vec) == 0:
        raise ValueError("superposition has zero norm")
    return QuantumState.pure(space, vec, normalize=True)


def tmsv(space: CompositeSpace, r: float) -> QuantumState:
    """Two-mode squeezed vacuum ``∝ sum_n tanh(r)^n |n, n>`` on two boson modes."""
    if space.n_modes != 2 or space.kinds() != {"boson"}:
        raise ValueError("tmsv needs exactly two boson modes")
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    cutoff = min(m.cutoff for m in space.modes)
    t = np.tanh(r)
    tail = t ** (2 * (cutoff + 1))
    if tail >= 1e-12:
        raise ValueError(f"cutoff {cutoff} too small for r={r}: truncated tail mass {tail:.3g}; increase the cutoff")
    vec = np.zeros(space.dim, dtype=complex)
    for n in range(cutoff + 1):
        vec[space.index_of((n, n))] = t**n
    return QuantumState.pure(space, vec, normalize=True)


def violating_family(space: CompositeSpace, theta: float, phi: float = 0.0) -> QuantumState:
    """``cos(theta)|1,1,0> + exp(i phi) sin(theta)|0,0,1>`` in the level basis."""
    if space.n_modes != 3:
        raise ValueError("violating_family needs three modes")
    if min(space.dims) < 2:
        raise ValueError("every mode needs at least two levels")
    return superpose(space, [(np.cos(theta), (1, 1, 0)), (np.exp(1j * phi) * np.sin(theta), (0, 0, 1))])


# --- random ensembles -------------------------------------------------------

def _caps(space: CompositeSpace, cap) -> list[int]:
    if cap is None:
        return [d - 1 for d in space.dims]
    caps = [int(cap)] * space.n_modes if np.isscalar(cap) else [int(c) for c in cap]
    if len(caps) != space.n_modes:
        raise ValueError(f"expected {space.n_modes} caps, got {len(caps)}")
    for c, d in zip(caps, space.dims):
        if not 0 <= c < d:
            raise ValueError(f"cap {c} outside 0..{d - 1}")
    return caps


def _support(space: CompositeSpace, caps: list[int]) -> np.ndarray:
    return np.flatnonzero(np.all(space.levels <= np.array(caps), axis=1))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure(space: CompositeSpace, rng: np.random.Generator, cap=None) -> QuantumState:
    """Haar-random pure state, optionally restricted to levels ``<= cap`` in every mode."""
    idx = _support(space, _caps(space, cap))
    vec = np.zeros(space.dim, dtype=complex)
    vec[idx] = _complex_gaussian(rng, idx.size)
    return QuantumState.pure(space, vec, normalize=True)


def ginibre(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """``G G† / tr(G G†)`` for a ``dim x rank`` complex Gaussian ``G``."""
    rank = dim if rank is None else int(rank)
    if rank < 1:
        raise ValueError("rank must be at least 1")
    g = _complex_gaussian(rng, (dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_density(space: CompositeSpace, rng: np.random.Generator, rank: int | None = None, cap=None) -> QuantumState:
    """Ginibre density matrix on the (optionally capped) support; full rank by default."""
    idx = _support(space, _caps(space, cap))
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = ginibre(idx.size, rng, rank)
    return QuantumState.mixed(space, rho, check=False)


def default_cap(space: CompositeSpace) -> list[int]:
    """Two levels below the cutoff for truncated kinds, the whole mode for spins."""
    caps = [m.dim - 1 if m.bounded else m.dim - 3 for m in space.modes]
    if min(caps) < 0:
        raise ValueError("cutoff too small for the default support cap; pass local_cap explicitly")
    return caps


def random_separable(
    space: CompositeSpace,
    rng: np.random.Generator,
    components: int = 8,
    local_cap=None,
    local_rank: int | None = None,
) -> QuantumState:
    """Mixture of ``components`` product states with flat-Dirichlet weights.

    Each local factor is a Ginibre density on levels ``<= local_cap`` of its
    mode. Truncated kinds (boson, su11) must keep the cap at most
    ``dim - 2`` so that the criterion operators act on the support without
    truncation error.
    """
    if components < 1:
        raise ValueError("components must be at least 1")
    caps = default_cap(space) if local_cap is None else _caps(space, local_cap)
    for c, m in zip(caps, space.modes):
        if not m.bounded and c > m.dim - 2:
            raise ValueError(f"local cap {c} too large for a truncated mode of dimension {m.dim}")
    weights = rng.standard_exponential(components)
    weights /= weights.sum()
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for w in weights:
        term = np.ones((1, 1), dtype=complex)
        for c, d in zip(caps, space.dims):
            local = np.zeros((d, d), dtype=complex)
            local[: c + 1, : c + 1] = ginibre(c + 1, rng, local_rank)
            term = np.kron(term, local)
        rho += w * term
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState.mixed(space, rho, check=False)


def from_spec(space: CompositeSpace, spec: dict, rng: np.random.Generator | None = None) -> QuantumState:
    """Build a state from its JSON description (see README for the accepted types)."""
    kind = spec.get("type")
    if kind == "superposition":
        terms = []
        for t in spec["terms"]:
            amp = t.get("amp", 1.0)
            amp = complex(amp[0], amp[1]) if isinstance(amp, (list, tuple)) else complex(amp)
            terms.append((amp, t["occ"]))
        return superpose(space, terms)
    if kind == "basis":
        return basis_state(space, spec["occ"])
    if kind == "tmsv":
        return tmsv(space, float(spec["r"]))
    if kind == "violating_family":
        return violating_family(space, float(spec["theta"]), float(spec.get("phi", 0.0)))
    if kind in ("random_pure", "random_density", "random_separable"):
        if rng is None:
            rng = rng_stream(int(spec.get("seed", 0)), int(spec.get("stream", 0)))
        if kind == "random_pure":
            return random_pure(space, rng, cap=spec.get("cap"))
        if kind == "random_density":
            return random_density(space, rng, rank=spec.get("rank"), cap=spec.get("cap"))
        return random_separable(
            space, rng, components=int(spec.get("K", 8)), local_cap=spec.get("cap"), local_rank=spec.get("local_rank")
        )
    raise ValueError(f"unknown state type {kind!r}")
