"""Mode descriptions, composite tensor-product spaces and the operator container.

Every mode carries a "level" basis starting at 0:

* boson: number states ``|n>``, ``n = 0..cutoff``
* spin: ``|N>`` with ``N = J_z + j``, ``N = 0..2j``
* su11: ``|m>`` with ``m = K_z - k``, ``m = 0..cutoff``

Flat indices put mode 1 in the most significant position, i.e. the flat
index of levels ``(n1, n2, n3)`` is ``(n1*d2 + n2)*d3 + n3``. Mode indices
are 1-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

BOSON = "boson"
SPIN = "spin"
SU11 = "su11"
KINDS = (BOSON, SPIN, SU11)


def _twice(value) -> int:
    """Return ``2*value`` as an int, insisting that ``value`` is a half-integer."""
    twice = Fraction(str(value)) * 2 if isinstance(value, (str, float)) else Fraction(value) * 2
    if twice.denominator != 1:
        raise ValueError(f"{value!r} is not a half-integer")
    return int(twice)


@dataclass(frozen=True)
class ModeSpec:
    """One tensor factor.

    Half-integer labels are stored doubled (``two_j``, ``two_k``) so that
    equality and hashing stay exact.
    """

    kind: str
    cutoff: int | None = None
    two_j: int | None = None
    two_k: int | None = None

    def __post_init__(self):
        if self.kind == BOSON:
            if self.cutoff is None or int(self.cutoff) < 1 or self.two_j or self.two_k:
                raise ValueError("boson mode needs an integer cutoff >= 1 and nothing else")
        elif self.kind == SPIN:
            if self.two_j is None or int(self.two_j) < 1 or self.cutoff is not None or self.two_k:
                raise ValueError("spin mode needs two_j >= 1 and no cutoff")
        elif self.kind == SU11:
            if self.two_k is None or int(self.two_k) < 1:
                raise ValueError("su11 mode needs two_k >= 1")
            if self.cutoff is None or int(self.cutoff) < 1 or self.two_j:
                raise ValueError("su11 mode needs an integer cutoff >= 1")
        else:
            raise ValueError(f"unknown mode kind {self.kind!r}; expected one of {KINDS}")

    @classmethod
    def boson(cls, cutoff: int) -> "ModeSpec":
        return cls(BOSON, cutoff=int(cutoff))

    @classmethod
    def spin(cls, j) -> "ModeSpec":
        """Spin-``j`` mode; ``j`` may be an int, float, Fraction or a string like ``"3/2"``."""
        return cls(SPIN, two_j=_twice(j))

    @classmethod
    def su11(cls, k, cutoff: int) -> "ModeSpec":
        return cls(SU11, cutoff=int(cutoff), two_k=_twice(k))

    @property
    def dim(self) -> int:
        if self.kind == SPIN:
            return self.two_j + 1
        return self.cutoff + 1

    @property
    def j(self) -> float:
        if self.kind != SPIN:
            raise AttributeError("only spin modes have j")
        return self.two_j / 2

    @property
    def k(self) -> float:
        if self.kind != SU11:
            raise AttributeError("only su11 modes have k")
        return self.two_k / 2

    @property
    def bounded(self) -> bool:
        """True when the mode is finite-dimensional by nature (no truncation)."""
        return self.kind == SPIN

    def to_json(self) -> dict:
        if self.kind == BOSON:
            return {"kind": BOSON, "cutoff": self.cutoff}
        if self.kind == SPIN:
            return {"kind": SPIN, "two_j": self.two_j}
        return {"kind": SU11, "two_k": self.two_k, "cutoff": self.cutoff}

    @classmethod
    def from_json(cls, obj: dict) -> "ModeSpec":
        kind = obj.get("kind")
        if kind == BOSON:
            return cls.boson(obj["cutoff"])
        if kind == SPIN:
            if "two_j" in obj:
                return cls(SPIN, two_j=int(obj["two_j"]))
            return cls.spin(obj["j"])
        if kind == SU11:
            if "two_k" in obj:
                return cls(SU11, cutoff=int(obj["cutoff"]), two_k=int(obj["two_k"]))
            return cls.su11(obj["k"], obj["cutoff"])
        raise ValueError(f"unknown mode kind {kind!r}")


@dataclass(frozen=True)
class CompositeSpace:
    modes: tuple[ModeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a space needs at least one mode")
        if self.dim < 2:
            raise ValueError("space dimension must be at least 2")

    @classmethod
    def bosons(cls, n: int, cutoff: int) -> "CompositeSpace":
        return cls(tuple(ModeSpec.boson(cutoff) for _ in range(n)))

    @classmethod
    def spins(cls, n: int, j) -> "CompositeSpace":
        return cls(tuple(ModeSpec.spin(j) for _ in range(n)))

    @classmethod
    def su11s(cls, n: int, k, cutoff: int) -> "CompositeSpace":
        return cls(tuple(ModeSpec.su11(k, cutoff) for _ in range(n)))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def kinds(self) -> set[str]:
        return {m.kind for m in self.modes}

    def mode(self, index: int) -> ModeSpec:
        """Mode by 1-based index."""
        self.check_mode_index(index)
        return self.modes[index - 1]

    def check_mode_index(self, index) -> int:
        if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
            raise ValueError(f"mode index must be an integer, got {index!r}")
        if not 1 <= index <= self.n_modes:
            raise ValueError(f"mode index {index} out of range 1..{self.n_modes}")
        return int(index)

    def index_of(self, occ: Sequence[int]) -> int:
        occ = tuple(occ)
        if len(occ) != self.n_modes:
            raise ValueError(f"expected {self.n_modes} levels, got {len(occ)}")
        flat = 0
        for level, d in zip(occ, self.dims):
            if not 0 <= level < d:
                raise ValueError(f"level {level} outside 0..{d - 1}")
            flat = flat * d + int(level)
        return flat

    def occupations_of(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.dim:
            raise ValueError(f"flat index {flat} outside 0..{self.dim - 1}")
        return tuple(int(v) for v in np.unravel_index(int(flat), self.dims))

    @cached_property
    def levels(self) -> np.ndarray:
        """``(dim, n_modes)`` integer table of per-mode levels for every flat index."""
        grids = np.indices(self.dims).reshape(self.n_modes, -1)
        return grids.T.copy()

    def to_json(self) -> dict:
        return {"modes": [m.to_json() for m in self.modes]}

    @classmethod
    def from_json(cls, obj: dict) -> "CompositeSpace":
        try:
            modes = obj["modes"]
        except (KeyError, TypeError):
            raise ValueError("space description needs a 'modes' list") from None
        return cls(tuple(ModeSpec.from_json(m) for m in modes))


class OperatorMatrix:
    """Dense complex matrix bound to a :class:`CompositeSpace`.

    The backing array is read-only; arithmetic returns new operators and
    refuses to mix operators from different spaces.
    """

    __slots__ = ("space", "data")

    def __init__(self, space: CompositeSpace, data):
        arr = np.array(data, dtype=complex)
        if arr.shape != (space.dim, space.dim):
            raise ValueError(f"matrix shape {arr.shape} does not match space dim {space.dim}")
        arr.flags.writeable = False
        self.space = space
        self.data = arr

    def _same(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            raise TypeError(f"expected OperatorMatrix, got {type(other).__name__}")
        if other.space != self.space:
            raise ValueError("operators live on different spaces")
        return other

    def __add__(self, other):
        if isinstance(other, Number):
            return OperatorMatrix(self.space, self.data + other * np.eye(self.space.dim))
        return OperatorMatrix(self.space, self.data + self._same(other).data)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Number):
            return OperatorMatrix(self.space, self.data - other * np.eye(self.space.dim))
        return OperatorMatrix(self.space, self.data - self._same(other).data)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return OperatorMatrix(self.space, -self.data)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return OperatorMatrix(self.space, scalar * self.data)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return OperatorMatrix(self.space, self.data / scalar)

    def __matmul__(self, other):
        return OperatorMatrix(self.space, self.data @ self._same(other).data)

    def __repr__(self):
        return f"OperatorMatrix(dim={self.space.dim}, modes={self.space.n_modes})"

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.data.conj().T)

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= atol)

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.data).copy()

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data), initial=0.0))

    def to_json(self) -> list:
        """Nested list of ``[re, im]`` pairs (debug export)."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.data]

    @classmethod
    def diag(cls, space: CompositeSpace, values) -> "OperatorMatrix":
        return cls(space, np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def identity(cls, space: CompositeSpace) -> "OperatorMatrix":
        return cls(space, np.eye(space.dim))


def safe_projector(space: CompositeSpace, degree: Iterable[int] | int) -> OperatorMatrix:
    """Diagonal projector onto levels ``<= dim - 1 - degree[i]`` in every mode.

    Operator identities whose monomials raise mode ``i`` by at most
    ``degree[i]`` quanta hold exactly inside this projector even though the
    matrices themselves are truncated.
    """
    if isinstance(degree, (int, np.integer)):
        degree = [int(degree)] * space.n_modes
    degree = list(degree)
    if len(degree) != space.n_modes:
        raise ValueError(f"expected {space.n_modes} degrees, got {len(degree)}")
    for d, dim in zip(degree, space.dims):
        if not 0 <= d < dim:
            raise ValueError(f"degree {d} must lie in 0..{dim - 1}")
    top = np.array(space.dims) - 1 - np.array(degree)
    keep = np.all(space.levels <= top, axis=1)
    return OperatorMatrix.diag(space, keep.astype(float))


def guard_degree(space: CompositeSpace, degree: int = 2) -> list[int]:
    """Per-mode degree for :func:`safe_projector`: 0 for spins, ``degree`` (clamped) otherwise."""
    return [0 if m.bounded else min(degree, m.dim - 1) for m in space.modes]
