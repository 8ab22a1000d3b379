"""CGLMP inequality for two qutrits under linear-optics-restricted measurements.

Each party measures after ``U_tot(theta, dH, dV)``: phase shifters between
two PBSs followed by a polarization rotator, then polarization-resolved
photon counting. Outcome ``a`` is the number of vertical photons, so
``|2,0> -> 0``, ``|1,1> -> 1``, ``|0,2> -> 2``.

``I3 = B1 + B2 + B3 + B4`` with

    B1 = P(A1 = B1) - P(A1 = B1 - 1)
    B2 = P(B1 = A2 + 1) - P(B1 = A2)
    B3 = P(A2 = B2) - P(A2 = B2 - 1)
    B4 = P(B2 = A1) - P(B2 = A1 - 1)

where ``X = Y + k`` is the event ``X == (Y + k) mod 3``. Local models obey
``I3 <= 2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import detection as det
from .elements import (
    MatrixBlock,
    apply_pbs,
    apply_phase,
    apply_rotator,
    phase_block,
    rotator_block,
)
from .fock import PureState, max_entangled, qutrit_matrix, tensor, vacuum

QUANTUM_MAX = 4 / (6 * math.sqrt(3) - 9)


@dataclass(frozen=True)
class QutritSetting:
    theta: float
    dh: float
    dv: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta, self.dh, self.dv)


@dataclass(frozen=True)
class SettingsQuartet:
    A1: QutritSetting
    A2: QutritSetting
    B1: QutritSetting
    B2: QutritSetting

    def to_vector(self) -> np.ndarray:
        return np.array([*self.A1.as_tuple(), *self.A2.as_tuple(), *self.B1.as_tuple(), *self.B2.as_tuple()])

    @classmethod
    def from_vector(cls, v) -> SettingsQuartet:
        v = [float(x) for x in v]
        return cls(*(QutritSetting(*v[3 * i : 3 * i + 3]) for i in range(4)))

    def to_dict(self) -> dict:
        return {
            name: {"theta": s.theta, "dH": s.dh, "dV": s.dv}
            for name, s in (("A1", self.A1), ("A2", self.A2), ("B1", self.B1), ("B2", self.B2))
        }


def u_tot(s: QutritSetting) -> MatrixBlock:
    """Two-photon block of phase shifters followed by the rotator (row layout).

    In row layout a later operation multiplies on the right, so the block
    is ``P3 @ U3``; its column operator is ``U3.T @ P3``.
    """
    p3 = phase_block(s.dh, s.dv, 2)
    u3 = rotator_block(s.theta, 2)
    return MatrixBlock(p3.matrix @ u3.matrix, u3.labels)


def _u_tot_actions(theta, dh, dv) -> np.ndarray:
    """Column operators of ``U_tot`` for broadcast parameter arrays, shape (..., 3, 3)."""
    theta, dh, dv = np.broadcast_arrays(
        np.asarray(theta, float), np.asarray(dh, float), np.asarray(dv, float)
    )
    c, s = np.cos(theta), np.sin(theta)
    r = math.sqrt(2) * c * s
    u3 = np.stack(
        [
            np.stack([c * c, r, s * s], -1),
            np.stack([-r, c * c - s * s, r], -1),
            np.stack([s * s, -r, c * c], -1),
        ],
        -2,
    )
    phases = np.exp(1j * np.stack([2 * dh, dh + dv, 2 * dv], -1))
    # (U3.T @ P3)[i, j] = U3[j, i] * p_j
    return np.swapaxes(u3, -1, -2) * phases[..., None, :]


@dataclass(frozen=True)
class JointProbTable:
    p: np.ndarray  # p[a, b]

    def __post_init__(self):
        if self.p.shape != (3, 3):
            raise ValueError("joint table must be 3x3")


def _tables(coeffs: np.ndarray, act_a: np.ndarray, act_b: np.ndarray) -> np.ndarray:
    amps = act_a @ coeffs @ np.swapaxes(act_b, -1, -2)
    probs = np.abs(amps) ** 2
    return probs / probs.sum(axis=(-1, -2), keepdims=True)


def _state_coeffs(state: PureState | None) -> np.ndarray:
    if state is None:
        state = max_entangled(3)
    c = qutrit_matrix(state)
    if not np.any(c):
        raise ValueError("state has no weight in the two-qutrit subspace")
    return c


def joint_probs(state: PureState | None, sa: QutritSetting, sb: QutritSetting) -> JointProbTable:
    """``p[a, b]`` for party A measuring with ``sa`` and B with ``sb`` (3x3 path)."""
    c = _state_coeffs(state)
    return JointProbTable(_tables(c, u_tot(sa).action(), u_tot(sb).action()))


def measure_in_fock(state: PureState, mode: int, aux: int, s: QutritSetting) -> PureState:
    """Measurement optics on ``mode``: PBS split to ``aux``, phases per path, PBS merge, rotator."""
    state = apply_pbs(state, mode, aux)
    state = apply_phase(state, mode, s.dh, 0.0)
    state = apply_phase(state, aux, 0.0, s.dv)
    state = apply_pbs(state, mode, aux)
    return apply_rotator(state, mode, s.theta)


def joint_probs_fock(state: PureState | None, sa: QutritSetting, sb: QutritSetting) -> JointProbTable:
    """Same table by simulating the optics photon by photon and counting."""
    if state is None:
        state = max_entangled(3)
    _state_coeffs(state)
    full = tensor(state, vacuum(2))
    full = measure_in_fock(full, 0, 2, sa)
    full = measure_in_fock(full, 1, 3, sb)
    for aux in (2, 3):
        if det.count_photons(full, aux).get((0, 0), 0.0) < 1 - 1e-12:
            raise RuntimeError("photons left in an auxiliary path")
    total = full.norm_sq()
    p = np.zeros((3, 3))
    for occ, amp in full.items():
        (_, na), (_, nb) = occ[0], occ[1]
        p[na, nb] += abs(amp) ** 2 / total
    return JointProbTable(p)


def prob_shift(table: JointProbTable, k: int, direction: str = "B=A+k") -> float:
    """``P(B = A + k)`` (``direction="B=A+k"``) or ``P(A = B + k)`` from a table ``p[a, b]``."""
    p = table.p
    if direction == "B=A+k":
        return float(sum(p[l, (l + k) % 3] for l in range(3)))
    if direction == "A=B+k":
        return float(sum(p[(l + k) % 3, l] for l in range(3)))
    raise ValueError(f"unknown direction {direction!r}")


def _b_terms(t11, t21, t22, t12) -> np.ndarray:
    """B1..B4 from tables (A1,B1), (A2,B1), (A2,B2), (A1,B2); works on stacked tables."""

    def shift(t, k):  # P(B = A + k) for t[..., a, b]
        return sum(t[..., l, (l + k) % 3] for l in range(3))

    b1 = shift(t11, 0) - shift(t11, 1)  # A1 = B1 - 1  <=>  B1 = A1 + 1
    b2 = shift(t21, 1) - shift(t21, 0)
    b3 = shift(t22, 0) - shift(t22, 1)
    b4 = shift(t12, 0) - shift(t12, 2)  # B2 = A1 - 1  <=>  B2 = A1 + 2
    return np.stack([b1, b2, b3, b4], axis=-1)


def _b_from_actions(c, a1, a2, b1, b2) -> np.ndarray:
    return _b_terms(_tables(c, a1, b1), _tables(c, a2, b1), _tables(c, a2, b2), _tables(c, a1, b2))


def b_values(quartet: SettingsQuartet, state: PureState | None = None) -> np.ndarray:
    c = _state_coeffs(state)
    acts = [u_tot(s).action() for s in (quartet.A1, quartet.A2, quartet.B1, quartet.B2)]
    return _b_from_actions(c, *acts)


def b_value(i: int, quartet: SettingsQuartet, state: PureState | None = None) -> float:
    if i not in (1, 2, 3, 4):
        raise ValueError(f"B index must be 1..4, got {i}")
    return float(b_values(quartet, state)[i - 1])


def i3(quartet: SettingsQuartet, state: PureState | None = None) -> float:
    return float(b_values(quartet, state).sum())


def _as_block(u) -> np.ndarray:
    m = u.matrix if isinstance(u, MatrixBlock) else np.asarray(u, dtype=complex)
    if m.shape != (3, 3) or not np.allclose(m @ m.conj().T, np.eye(3), atol=1e-10, rtol=0):
        raise ValueError("measurement block must be a 3x3 unitary")
    return m


def b_values_general(state: PureState | None, a1, a2, b1, b2) -> np.ndarray:
    """B1..B4 for arbitrary measurement unitaries given in row layout."""
    c = _state_coeffs(state)
    acts = [_as_block(u).T for u in (a1, a2, b1, b2)]
    return _b_from_actions(c, *acts)


def i3_general(state: PureState | None, a1, a2, b1, b2) -> float:
    return float(b_values_general(state, a1, a2, b1, b2).sum())


# two-parameter phase sweep


def fig4_quartet(x: float, y: float, theta: float = math.pi / 4) -> SettingsQuartet:
    return SettingsQuartet(
        A1=QutritSetting(theta, x, y),
        A2=QutritSetting(theta, x, 3 * y),
        B1=QutritSetting(theta, x, 2 * y),
        B2=QutritSetting(theta, x, 0.0),
    )


def i3_fig4(x, y, theta: float = math.pi / 4, state: PureState | None = None) -> np.ndarray:
    """Vectorized I3 over broadcast ``x, y`` for the two-parameter sweep family."""
    c = _state_coeffs(state)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    a1 = _u_tot_actions(theta, x, y)
    a2 = _u_tot_actions(theta, x, 3 * y)
    b1 = _u_tot_actions(theta, x, 2 * y)
    b2 = _u_tot_actions(theta, x, 0 * y)
    return _b_from_actions(c, a1, a2, b1, b2).sum(axis=-1)


@dataclass(frozen=True)
class SweepResult:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # values[i, j] at (xs[i], ys[j])
    max_value: float
    argmax: tuple[float, float]

    def rows(self):
        """Row-major ``(x, y, I3)`` triples."""
        for i, x in enumerate(self.xs):
            for j, y in enumerate(self.ys):
                yield float(x), float(y), float(self.values[i, j])


def sweep_fig4(
    x_range: tuple[float, float] = (0.0, math.pi),
    y_range: tuple[float, float] = (0.0, math.pi),
    steps: int = 400,
    state: PureState | None = None,
) -> SweepResult:
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    xs = np.linspace(*x_range, steps)
    ys = np.linspace(*y_range, steps)
    values = i3_fig4(xs[:, None], ys[None, :], state=state)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return SweepResult(xs, ys, values, float(values[i, j]), (float(xs[i]), float(ys[j])))


# optimization


@dataclass(frozen=True)
class OptimizeResult:
    quartet: SettingsQuartet
    i3: float
    evaluations: int
    starts: int


def _i3_vector(v: np.ndarray, c: np.ndarray) -> float:
    v = np.asarray(v, float).reshape(4, 3)
    acts = _u_tot_actions(v[:, 0], v[:, 1], v[:, 2])
    return float(_b_from_actions(c, acts[0], acts[1], acts[2], acts[3]).sum())


def _nelder_mead(fun, x0, max_evals: int = 10_000, xatol: float = 1e-9):
    # convergence on simplex size only
    return minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={"xatol": xatol, "fatol": np.inf, "maxfev": max_evals, "adaptive": False},
    )


def optimize12(
    multistart: int = 50,
    seed: int = 0,
    state: PureState | None = None,
    starts: list[np.ndarray] | None = None,
    max_evals: int = 10_000,
) -> OptimizeResult:
    """Maximize I3 over the 12 restricted parameters by multistart simplex search.

    Starting points are drawn uniformly from ``[0, pi)^12`` with
    ``numpy.random.default_rng(seed)`` unless ``starts`` is given.
    """
    if multistart < 1:
        raise ValueError(f"multistart must be >= 1, got {multistart}")
    c = _state_coeffs(state)
    if starts is None:
        rng = np.random.default_rng(seed)
        starts = [rng.uniform(0, math.pi, 12) for _ in range(multistart)]
    best_v, best_x, evals = -np.inf, None, 0
    for x0 in starts:
        res = _nelder_mead(lambda v: -_i3_vector(v, c), np.asarray(x0, float), max_evals)
        evals += res.nfev
        if -res.fun > best_v:
            best_v, best_x = -res.fun, res.x
    return OptimizeResult(SettingsQuartet.from_vector(best_x), float(best_v), evals, len(starts))


@functools.cache
def _hermitian_basis() -> np.ndarray:
    """Nine real-coefficient generators spanning the 3x3 Hermitian matrices."""
    basis = []
    for i in range(3):
        m = np.zeros((3, 3), complex)
        m[i, i] = 1
        basis.append(m)
    for i in range(3):
        for j in range(i + 1, 3):
            m = np.zeros((3, 3), complex)
            m[i, j] = m[j, i] = 1
            basis.append(m)
            m = np.zeros((3, 3), complex)
            m[i, j], m[j, i] = -1j, 1j
            basis.append(m)
    return np.array(basis)


def unitary_from_params(v) -> np.ndarray:
    """``exp(i H)`` with ``H`` Hermitian from 9 real coordinates; covers U(3)."""
    h = np.tensordot(np.asarray(v, float), _hermitian_basis(), axes=1)
    return expm(1j * h)


@dataclass(frozen=True)
class GeneralOptimum:
    blocks: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]  # A1, A2, B1, B2
    i3: float


def optimize_general(
    multistart: int = 10, seed: int = 0, state: PureState | None = None, objective: str = "i3"
) -> GeneralOptimum:
    """Unrestricted optimum over four U(3) measurements (quasi-Newton, multistart).

    ``objective="i3"`` maximizes I3; ``"b1"`` minimizes B1 alone.
    """
    c = _state_coeffs(state)

    def blocks(v):
        return [unitary_from_params(v[9 * k : 9 * k + 9]) for k in range(4)]

    def value(v):
        acts = [u.T for u in blocks(v)]
        b = _b_from_actions(c, *acts)
        return -float(b.sum()) if objective == "i3" else float(b[0])

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(multistart):
        res = minimize(value, rng.uniform(-math.pi, math.pi, 36), method="BFGS")
        if best is None or res.fun < best.fun:
            best = res
    bl = tuple(blocks(best.x))
    return GeneralOptimum(bl, i3_general(state, *bl))
