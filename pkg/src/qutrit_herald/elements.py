"""Linear-optical elements acting exactly on :class:`~qutrit_herald.fock.PureState`.

Every element is a passive linear map on creation operators,
``a_s^dag -> sum_t T[t, s] a_t^dag`` over a handful of (mode, polarization)
slots. It is applied to a Fock ket by expanding the product of transformed
creation operators (multinomial expansion), which is exact for any photon
number.

Conventions:

* 50:50 beam splitter ``exp(i pi/4 J_BS)``:
  ``a^dag -> (a^dag + i c^dag)/sqrt2``, ``c^dag -> (i a^dag + c^dag)/sqrt2``.
* Polarization rotator ``exp(theta J_R)`` with ``J_R = a_V^dag a_H - a_H^dag a_V``:
  ``a_H^dag -> cos a_H^dag + sin a_V^dag``, ``a_V^dag -> -sin a_H^dag + cos a_V^dag``.
* Phase shifter: ``|m, n> -> exp(i(m dH + n dV)) |m, n>``.
* Polarizing beam splitter: H transmitted, V exchanged between the two modes,
  no reflection phase.

Matrix blocks (:func:`rotator_block`, :func:`phase_block`) use the row layout
of the printed tables: row ``i`` holds the output amplitudes of input basis
ket ``i`` in the basis ``(|1,0>, |0,1>)`` or ``(|2,0>, |1,1>, |0,2>)``.
:meth:`MatrixBlock.action` gives the usual column-vector operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import Pol, PureState

Slot = tuple[int, int]  # (mode, polarization)

_SQRT2 = math.sqrt(2.0)


def _apply_linear(
    state: PureState, slots: tuple[Slot, ...], transform: tuple[tuple[complex, ...], ...]
) -> PureState:
    """Apply ``a_{slots[s]}^dag -> sum_t transform[t][s] a_{slots[t]}^dag``."""
    for mode, _ in slots:
        if not 0 <= mode < state.n_modes:
            raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    out: dict = {}
    for occ, amp in state.items():
        counts = tuple(occ[mode][pol] for mode, pol in slots)
        if not any(counts):
            out[occ] = out.get(occ, 0j) + amp
            continue
        base = [list(pair) for pair in occ]
        for mode, pol in slots:
            base[mode][pol] = 0
        for exps, coef in _expand(counts, transform):
            new = [row[:] for row in base]
            for (mode, pol), k in zip(slots, exps):
                new[mode][pol] += k
            key = tuple(tuple(row) for row in new)
            out[key] = out.get(key, 0j) + amp * coef
    return PureState(out, state.n_modes)


@lru_cache(maxsize=4096)
def _expand(
    counts: tuple[int, ...], transform: tuple[tuple[complex, ...], ...]
) -> tuple[tuple[tuple[int, ...], complex], ...]:
    """Ket amplitudes of ``prod_s (sum_t T[t,s] a_t^dag)^{n_s} / sqrt(n_s!) |0>``."""
    k = len(counts)
    poly: dict[tuple[int, ...], complex] = {(0,) * k: 1.0 + 0j}
    for s, n in enumerate(counts):
        column = [transform[t][s] for t in range(k)]
        for _ in range(n):
            nxt: dict[tuple[int, ...], complex] = {}
            for mono, c in poly.items():
                for t, w in enumerate(column):
                    if w == 0:
                        continue
                    m2 = mono[:t] + (mono[t] + 1,) + mono[t + 1 :]
                    nxt[m2] = nxt.get(m2, 0j) + c * w
            poly = nxt
    norm_in = math.prod(math.factorial(n) for n in counts)
    result = []
    for mono, c in poly.items():
        norm_out = math.prod(math.factorial(e) for e in mono)
        result.append((mono, c * math.sqrt(norm_out / norm_in)))
    return tuple(result)


def _as_key(matrix: np.ndarray) -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(complex(x) for x in row) for row in matrix)


def _check_distinct(a: int, b: int) -> None:
    if a == b:
        raise ValueError(f"element needs two distinct modes, got {a} twice")


def apply_bs(state: PureState, a: int, c: int) -> PureState:
    _check_distinct(a, c)
    slots = ((a, Pol.H), (a, Pol.V), (c, Pol.H), (c, Pol.V))
    t = np.zeros((4, 4), dtype=complex)
    for p in (0, 1):
        # column = image of slot; rows: a_p, c_p
        t[p, p] = 1 / _SQRT2
        t[2 + p, p] = 1j / _SQRT2
        t[p, 2 + p] = 1j / _SQRT2
        t[2 + p, 2 + p] = 1 / _SQRT2
    return _apply_linear(state, slots, _as_key(t))


def apply_rotator(state: PureState, mode: int, theta: float) -> PureState:
    c, s = math.cos(theta), math.sin(theta)
    slots = ((mode, Pol.H), (mode, Pol.V))
    return _apply_linear(state, slots, ((c, -s), (s, c)))


def apply_phase(state: PureState, mode: int, dh: float, dv: float) -> PureState:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    out = {}
    for occ, amp in state.items():
        m, n = occ[mode]
        out[occ] = amp * complex(math.cos(m * dh + n * dv), math.sin(m * dh + n * dv))
    return PureState(out, state.n_modes)


def apply_polarization_unitary(state: PureState, mode: int, u: np.ndarray) -> PureState:
    """General single-mode polarization transform (wave plates).

    ``u`` is the one-photon column operator on ``(|1,0>, |0,1>)``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12):
        raise ValueError("polarization transform must be a 2x2 unitary")
    return _apply_linear(state, ((mode, Pol.H), (mode, Pol.V)), _as_key(u))


def apply_pbs(state: PureState, a: int, b: int) -> PureState:
    _check_distinct(a, b)
    for mode in (a, b):
        if not 0 <= mode < state.n_modes:
            raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    out = {}
    for occ, amp in state.items():
        new = list(occ)
        new[a] = (occ[a][0], occ[b][1])
        new[b] = (occ[b][0], occ[a][1])
        out[tuple(new)] = amp
    return PureState(out, state.n_modes)


@dataclass(frozen=True)
class BeamSplitter:
    a: int
    c: int

    def apply(self, state: PureState) -> PureState:
        return apply_bs(state, self.a, self.c)


@dataclass(frozen=True)
class Rotator:
    mode: int
    theta: float

    def apply(self, state: PureState) -> PureState:
        return apply_rotator(state, self.mode, self.theta)


@dataclass(frozen=True)
class PhaseShifter:
    mode: int
    dh: float
    dv: float

    def apply(self, state: PureState) -> PureState:
        return apply_phase(state, self.mode, self.dh, self.dv)


@dataclass(frozen=True)
class PolarizingBS:
    a: int
    b: int

    def apply(self, state: PureState) -> PureState:
        return apply_pbs(state, self.a, self.b)


Element = BeamSplitter | Rotator | PhaseShifter | PolarizingBS


def run(state: PureState, elements) -> PureState:
    """Apply ``elements`` left to right."""
    for el in elements:
        state = el.apply(state)
    return state


@dataclass(frozen=True)
class MatrixBlock:
    """Dense single-mode block in the printed row layout (row = input ket)."""

    matrix: np.ndarray
    labels: tuple[tuple[int, int], ...]

    def action(self) -> np.ndarray:
        """Column-vector operator: ``new_amps = action() @ amps``."""
        return self.matrix.T

    def is_unitary(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.allclose(m @ m.conj().T, np.eye(len(m)), atol=tol, rtol=0))


ONE_PHOTON_LABELS = ((1, 0), (0, 1))
TWO_PHOTON_LABELS = ((2, 0), (1, 1), (0, 2))


def _labels(photons: int) -> tuple[tuple[int, int], ...]:
    if photons == 1:
        return ONE_PHOTON_LABELS
    if photons == 2:
        return TWO_PHOTON_LABELS
    raise ValueError(f"blocks exist for 1 or 2 photons, got {photons}")


def rotator_block(theta: float, photons: int) -> MatrixBlock:
    labels = _labels(photons)
    c, s = math.cos(theta), math.sin(theta)
    if photons == 1:
        m = np.array([[c, s], [-s, c]], dtype=complex)
    else:
        r = _SQRT2 * c * s
        m = np.array(
            [[c * c, r, s * s], [-r, c * c - s * s, r], [s * s, -r, c * c]],
            dtype=complex,
        )
    return MatrixBlock(m, labels)


def phase_block(dh: float, dv: float, photons: int) -> MatrixBlock:
    labels = _labels(photons)
    phases = [m * dh + n * dv for m, n in labels]
    return MatrixBlock(np.diag(np.exp(1j * np.array(phases))), labels)
