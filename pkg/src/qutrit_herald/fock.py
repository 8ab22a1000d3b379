"""Sparse pure states of polarized photons in second quantization.

A basis ket is an occupation tuple ``((m0, n0), (m1, n1), ...)`` holding the
number of horizontal (``m``) and vertical (``n``) photons in each spatial
mode. A :class:`PureState` maps occupation tuples to complex amplitudes.

Qutrit encoding: ``|0> = |2,0>``, ``|1> = |1,1>``, ``|2> = |0,2>``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

PRUNE_EPSILON = 1e-14
NORM_TOL = 1e-12

Occupation = tuple[tuple[int, int], ...]


class Pol(enum.IntEnum):
    """Polarization index inside an ``(m, n)`` pair."""

    H = 0
    V = 1


class PureState:
    """Immutable sparse ket over ``n_modes`` polarized spatial modes.

    Amplitudes smaller than :data:`PRUNE_EPSILON` in magnitude are dropped on
    construction. The state may be unnormalized; use :meth:`normalized`.
    """

    __slots__ = ("_amps", "_n_modes")
    # let numpy scalars defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, amplitudes: Mapping[Occupation, complex], n_modes: int):
        if n_modes < 0:
            raise ValueError(f"n_modes must be non-negative, got {n_modes}")
        amps: dict[Occupation, complex] = {}
        for occ, amp in amplitudes.items():
            if len(occ) != n_modes:
                raise ValueError(f"occupation {occ} does not have {n_modes} modes")
            if abs(amp) >= PRUNE_EPSILON:
                amps[occ] = complex(amp)
        self._amps = MappingProxyType(amps)
        self._n_modes = n_modes

    @property
    def n_modes(self) -> int:
        return self._n_modes

    @property
    def amplitudes(self) -> Mapping[Occupation, complex]:
        return self._amps

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[Occupation]:
        return iter(self._amps)

    def __contains__(self, occ: object) -> bool:
        return occ in self._amps

    def __getitem__(self, occ: Occupation) -> complex:
        return self._amps.get(occ, 0j)

    def items(self):
        return self._amps.items()

    def sorted_items(self) -> list[tuple[Occupation, complex]]:
        """Entries in canonical basis order (lexicographic by mode, m, n)."""
        return sorted(self._amps.items())

    def __repr__(self) -> str:
        terms = ", ".join(f"{occ}: {amp:.6g}" for occ, amp in self.sorted_items()[:6])
        more = "" if len(self) <= 6 else f", ... (+{len(self) - 6})"
        return f"PureState({{{terms}{more}}}, n_modes={self._n_modes})"

    # linear structure

    def _check_compatible(self, other: PureState) -> None:
        if self._n_modes != other._n_modes:
            raise ValueError(
                f"mode-count mismatch: {self._n_modes} vs {other._n_modes}"
            )

    def __add__(self, other: PureState) -> PureState:
        self._check_compatible(other)
        out = dict(self._amps)
        for occ, amp in other.items():
            out[occ] = out.get(occ, 0j) + amp
        return PureState(out, self._n_modes)

    def __sub__(self, other: PureState) -> PureState:
        return self + (-1) * other

    def __mul__(self, scalar: complex) -> PureState:
        return PureState({k: scalar * v for k, v in self._amps.items()}, self._n_modes)

    __rmul__ = __mul__

    def __neg__(self) -> PureState:
        return -1 * self

    def __truediv__(self, scalar: complex) -> PureState:
        return self * (1 / scalar)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq() - 1.0) <= tol

    def normalized(self) -> PureState:
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        return self / nrm

    def is_zero(self) -> bool:
        return not self._amps


def empty_state(n_modes: int) -> PureState:
    """The zero vector; used for impossible measurement branches."""
    return PureState({}, n_modes)


def vacuum(n_modes: int) -> PureState:
    if n_modes < 1:
        raise ValueError(f"mode_count must be >= 1, got {n_modes}")
    return PureState({((0, 0),) * n_modes: 1.0}, n_modes)


def _check_mode(state: PureState, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")


def _bump(occ: Occupation, mode: int, pol: int, delta: int) -> Occupation:
    pair = list(occ[mode])
    pair[pol] += delta
    return occ[:mode] + (tuple(pair),) + occ[mode + 1 :]


def create(state: PureState, mode: int, pol: Pol | int) -> PureState:
    """Apply the creation operator for ``(mode, pol)``; result is unnormalized."""
    _check_mode(state, mode)
    out = {}
    for occ, amp in state.items():
        n = occ[mode][pol]
        out[_bump(occ, mode, pol, 1)] = amp * math.sqrt(n + 1)
    return PureState(out, state.n_modes)


def annihilate(state: PureState, mode: int, pol: Pol | int) -> PureState:
    _check_mode(state, mode)
    out = {}
    for occ, amp in state.items():
        n = occ[mode][pol]
        if n:
            out[_bump(occ, mode, pol, -1)] = amp * math.sqrt(n)
    return PureState(out, state.n_modes)


def basis_state(spec: Iterable[tuple[int, int]]) -> PureState:
    """Normalized ket ``|m0,n0> (x) |m1,n1> (x) ...``."""
    occ = tuple((int(m), int(n)) for m, n in spec)
    if not occ:
        raise ValueError("basis_state needs at least one mode")
    if any(m < 0 or n < 0 for m, n in occ):
        raise ValueError(f"negative photon count in {occ}")
    return PureState({occ: 1.0}, len(occ))


def inner(a: PureState, b: PureState) -> complex:
    """``<a|b>`` with ``a`` conjugated."""
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode-count mismatch: {a.n_modes} vs {b.n_modes}")
    if len(a) > len(b):
        return sum((a[k].conjugate() * v for k, v in b.items()), 0j)
    return sum((v.conjugate() * b[k] for k, v in a.items()), 0j)


def tensor(a: PureState, b: PureState) -> PureState:
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            out[ka + kb] = va * vb
    return PureState(out, a.n_modes + b.n_modes)


def fidelity(a: PureState, b: PureState) -> float:
    if not a.is_normalized() or not b.is_normalized():
        raise ValueError("fidelity requires normalized states")
    return min(1.0, abs(inner(a, b)) ** 2)


def total_photons(state: PureState) -> dict[int, float]:
    """Probability of each total photon number (state is normalized first)."""
    nrm = state.norm_sq()
    dist: dict[int, float] = {}
    for occ, amp in state.items():
        n = sum(m + v for m, v in occ)
        dist[n] = dist.get(n, 0.0) + abs(amp) ** 2 / nrm
    return dict(sorted(dist.items()))


def remove_mode(state: PureState, mode: int) -> PureState:
    """Drop a mode that holds no photons in any entry."""
    _check_mode(state, mode)
    out = {}
    for occ, amp in state.items():
        if occ[mode] != (0, 0):
            raise ValueError(f"mode {mode} is not empty in entry {occ}")
        out[occ[:mode] + occ[mode + 1 :]] = amp
    return PureState(out, state.n_modes - 1)


def permute_modes(state: PureState, order: list[int]) -> PureState:
    """New state whose mode ``i`` is the old mode ``order[i]``."""
    if sorted(order) != list(range(state.n_modes)):
        raise ValueError(f"{order} is not a permutation of {state.n_modes} modes")
    return PureState(
        {tuple(occ[j] for j in order): amp for occ, amp in state.items()},
        state.n_modes,
    )


# qudit encodings

QUTRIT_BASIS: tuple[tuple[int, int], ...] = ((2, 0), (1, 1), (0, 2))


def qudit_level(d: int, i: int) -> tuple[int, int]:
    """Occupation ``(d-1-i, i)`` encoding qudit level ``i`` with ``d-1`` photons."""
    return (d - 1 - i, i)


def max_entangled(d: int) -> PureState:
    """``(1/sqrt d) sum_i |d-1-i, i>_A |d-1-i, i>_B``."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    c = 1 / math.sqrt(d)
    return PureState(
        {(qudit_level(d, i), qudit_level(d, i)): c for i in range(d)}, 2
    )


def bell_pair() -> PureState:
    return max_entangled(2)


def two_qutrit_state(a0: complex, a1: complex, a2: complex) -> PureState:
    """``a0|0>|0> + a1|1>|1> + a2|2>|2>`` in the two-photon-per-mode encoding."""
    return PureState(
        {(q, q): a for q, a in zip(QUTRIT_BASIS, (a0, a1, a2))}, 2
    )


def single_qutrit(amps: Iterable[complex]) -> PureState:
    return PureState({(q,): complex(a) for q, a in zip(QUTRIT_BASIS, amps)}, 1)


@dataclass(frozen=True)
class QutritAmplitudes:
    a0: complex
    a1: complex
    a2: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2], dtype=complex)

    @classmethod
    def from_array(cls, v) -> QutritAmplitudes:
        a0, a1, a2 = (complex(x) for x in v)
        return cls(a0, a1, a2)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


def qutrit_matrix(state: PureState) -> np.ndarray:
    """3x3 coefficient matrix ``C[i, j]`` of ``sum C_ij |i>_A |j>_B``.

    Raises ``ValueError`` if the state has support outside the two-photon
    per mode subspace.
    """
    if state.n_modes != 2:
        raise ValueError(f"expected a two-mode state, got {state.n_modes} modes")
    index = {q: i for i, q in enumerate(QUTRIT_BASIS)}
    c = np.zeros((3, 3), dtype=complex)
    for (qa, qb), amp in state.items():
        if qa not in index or qb not in index:
            raise ValueError(f"entry {(qa, qb)} lies outside the two-qutrit subspace")
        c[index[qa], index[qb]] = amp
    return c


def state_from_qutrit_matrix(c: np.ndarray) -> PureState:
    c = np.asarray(c, dtype=complex)
    return PureState(
        {
            (QUTRIT_BASIS[i], QUTRIT_BASIS[j]): c[i, j]
            for i in range(3)
            for j in range(3)
        },
        2,
    )


def qutrit_amplitudes(state: PureState) -> QutritAmplitudes:
    """Amplitudes of a single-mode qutrit or of a correlated ``sum a_i|i>|i>`` state."""
    if state.n_modes == 1:
        for (occ,) in state:
            if occ not in QUTRIT_BASIS:
                raise ValueError(f"entry {occ} is not a qutrit level")
        return QutritAmplitudes(*(state[(q,)] for q in QUTRIT_BASIS))
    c = qutrit_matrix(state)
    if np.any(np.abs(c - np.diag(np.diag(c))) > PRUNE_EPSILON):
        raise ValueError("state has off-diagonal two-qutrit terms")
    return QutritAmplitudes.from_array(np.diag(c))


# serialization


def to_json(state: PureState) -> list[dict]:
    return [
        {
            "mode_occupations": [[m, n] for m, n in occ],
            "re": amp.real,
            "im": amp.imag,
        }
        for occ, amp in state.sorted_items()
    ]


def from_json(entries: list[dict], n_modes: int | None = None) -> PureState:
    amps = {}
    for e in entries:
        occ = tuple((int(m), int(n)) for m, n in e["mode_occupations"])
        amps[occ] = complex(e["re"], e["im"])
    if n_modes is None:
        if not amps:
            raise ValueError("n_modes is required for an empty state")
        n_modes = len(next(iter(amps)))
    return PureState(amps, n_modes)
