"""Two-qubit linear algebra in the sigma_x product basis.

Basis ordering is (|aa>, |ab>, |ba>, |bb>) where |a>, |b> are the +1 / -1
eigenstates of sigma_x. In this convention

    sigma_x = [[1, 0], [0, -1]]
    sigma_y = [[0, 1], [1, 0]]      (eigenstates |+-> = (|a> +- |b>)/sqrt 2)
    sigma_z = [[0, -i], [i, 0]]

which satisfies sigma_x sigma_y sigma_z = i I.

Operators built from Pauli products only ever hold entries in {0, +-1, +-i}.
Those are exactly representable in complex128 and so are all their products,
so operator identities are checked with exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

STATE_TOL = 1e-12
NORM_TOL = 1e-9

SQRT1_2 = 1.0 / np.sqrt(2.0)

_SINGLE = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[1, 0], [0, -1]], dtype=complex),
    "y": np.array([[0, 1], [1, 0]], dtype=complex),
    "z": np.array([[0, -1j], [1j, 0]], dtype=complex),
}

AXES = ("x", "y", "z")
BASIS_LABELS = ("aa", "ab", "ba", "bb")


class DegenerateStateError(ValueError):
    """Raised when a state is not normalized closely enough to sample from."""


def single_pauli(axis: str) -> np.ndarray:
    """Return a fresh copy of the 2x2 Pauli matrix for ``axis`` in this basis."""
    try:
        return _SINGLE[axis].copy()
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}") from None


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator4:
    """A 4x4 complex operator. Equality is exact, entry by entry."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.entries)
        if arr.shape != (4, 4):
            raise ValueError(f"Operator4 needs shape (4, 4), got {arr.shape}")
        object.__setattr__(self, "entries", arr)

    def __matmul__(self, other: "Operator4") -> "Operator4":
        return op_product(self, other)

    def __neg__(self) -> "Operator4":
        return Operator4(-self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Operator4):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())

    def apply(self, state: "TwoQubitState") -> np.ndarray:
        return self.entries @ state.amplitudes

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.conj().T))

    def has_unit_entries(self) -> bool:
        """True if every entry lies in {0, +-1, +-i}."""
        allowed = {0j, 1 + 0j, -1 + 0j, 1j, -1j}
        return all(complex(v) in allowed for v in self.entries.ravel())


IDENTITY = Operator4(np.eye(4))


def pauli(spin_index: int, axis: str) -> Operator4:
    """sigma_axis on particle ``spin_index`` (1 or 2), identity on the other."""
    s = single_pauli(axis)
    if spin_index == 1:
        return Operator4(np.kron(s, _SINGLE["i"]))
    if spin_index == 2:
        return Operator4(np.kron(_SINGLE["i"], s))
    raise ValueError(f"spin_index must be 1 or 2, got {spin_index!r}")


def op_product(a: Operator4, b: Operator4) -> Operator4:
    return Operator4(a.entries @ b.entries)


def commutes(a: Operator4, b: Operator4) -> bool:
    return bool(np.array_equal(a.entries @ b.entries, b.entries @ a.entries))


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Amplitudes over (|aa>, |ab>, |ba>, |bb>).

    The constructor does not renormalize; use :meth:`normalized` for raw
    input. Sampling routines reject states whose norm is off by more than
    ``NORM_TOL``.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.amplitudes)
        if arr.shape != (4,):
            raise ValueError(f"TwoQubitState needs 4 amplitudes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex], min_norm: float = 1e-6) -> "TwoQubitState":
        arr = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(arr))
        if not np.isfinite(norm) or norm < min_norm:
            raise DegenerateStateError(f"state norm {norm:g} is too small to normalize")
        return cls(arr / norm)

    @classmethod
    def basis(cls, label: str) -> "TwoQubitState":
        vec = np.zeros(4, dtype=complex)
        vec[BASIS_LABELS.index(label)] = 1.0
        return cls(vec)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "TwoQubitState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: "TwoQubitState", atol: float = STATE_TOL) -> bool:
        return bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))

    def to_pairs(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]

    @classmethod
    def from_pairs(cls, pairs) -> "TwoQubitState":
        return cls([complex(re, im) for re, im in pairs])


def product_state(first: Sequence[complex], second: Sequence[complex]) -> TwoQubitState:
    return TwoQubitState(np.kron(np.asarray(first, dtype=complex), np.asarray(second, dtype=complex)))


def random_state(rng: np.random.Generator) -> TwoQubitState:
    """Haar-random pure state."""
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    return TwoQubitState.normalized(z)


# Single-spin kets in the sigma_x basis.
KET_A = np.array([1, 0], dtype=complex)
KET_B = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([SQRT1_2, SQRT1_2], dtype=complex)
KET_MINUS = np.array([SQRT1_2, -SQRT1_2], dtype=complex)

SINGLET = TwoQubitState((np.kron(KET_A, KET_B) - np.kron(KET_B, KET_A)) * SQRT1_2)


@dataclass(frozen=True)
class OrthonormalBasis4:
    """Four states plus the joint eigenvalues of two commuting observables."""

    vectors: tuple[TwoQubitState, ...]
    labels: tuple[tuple[int, int], ...]
    observables: tuple[Operator4, Operator4]
    names: tuple[str, str]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Rows are the basis vectors."""
        return np.stack([v.amplitudes for v in self.vectors])

    def index_of(self, labels: tuple[int, int]) -> int:
        return self.labels.index(tuple(labels))

    def max_eigen_residual(self) -> float:
        worst = 0.0
        for vec, pair in zip(self.vectors, self.labels):
            for obs, val in zip(self.observables, pair):
                r = np.linalg.norm(obs.apply(vec) - val * vec.amplitudes)
                worst = max(worst, float(r))
        return worst

    def max_orthonormality_error(self) -> float:
        gram = np.array([[u.inner(v) for v in self.vectors] for u in self.vectors])
        return float(np.max(np.abs(gram - np.eye(len(self.vectors)))))

    def is_valid(self, tol: float = STATE_TOL) -> bool:
        return (
            len(self.vectors) == 4
            and self.max_orthonormality_error() < tol
            and self.max_eigen_residual() < tol
        )


def _ket(first, second) -> np.ndarray:
    return np.kron(first, second)


@lru_cache(maxsize=None)
def bell_basis_xxyy() -> OrthonormalBasis4:
    """Bell states labelled by (s1x s2x, s1y s2y)."""
    aa, ab, ba, bb = (_ket(p, q) for p in (KET_A, KET_B) for q in (KET_A, KET_B))
    vectors = (
        (aa + bb) * SQRT1_2,
        (aa - bb) * SQRT1_2,
        (ab + ba) * SQRT1_2,
        (ab - ba) * SQRT1_2,
    )
    return OrthonormalBasis4(
        vectors=tuple(TwoQubitState(v) for v in vectors),
        labels=((1, 1), (1, -1), (-1, 1), (-1, -1)),
        observables=(pauli(1, "x") @ pauli(2, "x"), pauli(1, "y") @ pauli(2, "y")),
        names=("X1X2", "Y1Y2"),
    )


@lru_cache(maxsize=None)
def bell_basis_xyyx() -> OrthonormalBasis4:
    """Maximally entangled states labelled by (s1x s2y, s1y s2x)."""
    a_p, b_m = _ket(KET_A, KET_PLUS), _ket(KET_B, KET_MINUS)
    a_m, b_p = _ket(KET_A, KET_MINUS), _ket(KET_B, KET_PLUS)
    vectors = (
        (a_p + b_m) * SQRT1_2,
        (a_p - b_m) * SQRT1_2,
        (a_m + b_p) * SQRT1_2,
        (a_m - b_p) * SQRT1_2,
    )
    return OrthonormalBasis4(
        vectors=tuple(TwoQubitState(v) for v in vectors),
        labels=((1, 1), (1, -1), (-1, 1), (-1, -1)),
        observables=(pauli(1, "x") @ pauli(2, "y"), pauli(1, "y") @ pauli(2, "x")),
        names=("X1Y2", "Y1X2"),
    )


def check_normalized(state: TwoQubitState, tol: float = NORM_TOL) -> None:
    norm = state.norm
    if abs(norm - 1.0) > tol:
        raise DegenerateStateError(f"state norm {norm!r} deviates from 1 by more than {tol:g}")


def born_probabilities(state: TwoQubitState, basis: OrthonormalBasis4) -> np.ndarray:
    check_normalized(state)
    probs = np.abs(basis.matrix.conj() @ state.amplitudes) ** 2
    return probs / probs.sum()


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index from a discrete distribution using a single uniform."""
    cdf = np.cumsum(probs)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    # side="right" never lands on a zero-probability slot except past the end
    return min(k, int(np.flatnonzero(probs)[-1]))


def measure_in_basis(state: TwoQubitState, basis: OrthonormalBasis4, rng: np.random.Generator):
    """Projective measurement in ``basis``.

    Returns ``(index, labels, post_state)`` with ``index`` drawn with Born
    probability ``|<basis_k|state>|^2``.
    """
    probs = born_probabilities(state, basis)
    k = sample_index(probs, rng)
    return k, basis.labels[k], basis.vectors[k]
