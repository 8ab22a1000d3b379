"""Heralding circuits built from the element set and ideal detectors.

Mode layouts (index: label) are fixed per circuit:

* :func:`herald_qutrit`, :func:`herald_unbalanced`, :func:`nest_qudit`,
  :func:`build_unbalanced_212`: ``0: A, 1: B, 2: C, 3: D``.
* :func:`hbpg`: ``0: A (= A1'), 1: B (= B1), 2: A1, 3: B1'``; modes 2 and 3
  carry the fusion detectors.
* :func:`teleport`: ``0: A, 1: B, 2: C`` with the unknown qutrit in ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import detection as det
from .elements import (
    apply_bs,
    apply_pbs,
    apply_phase,
    apply_polarization_unitary,
    apply_rotator,
)
from .fock import (
    QUTRIT_BASIS,
    PureState,
    QutritAmplitudes,
    bell_pair,
    fidelity,
    max_entangled,
    remove_mode,
    single_qutrit,
    tensor,
    total_photons,
    two_qutrit_state,
    vacuum,
)

QUARTER = math.pi / 4


# parametric down-conversion


@dataclass(frozen=True)
class PdcParams:
    tau: float
    d_max: int = 3

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not 1 <= self.d_max <= 4:
            raise ValueError(f"d_max must be in 1..4, got {self.d_max}")


def pdc_alpha(d: int, tau: float) -> float:
    """Pair-number weight ``tanh^(d-1)(tau) / cosh^2(tau)``."""
    return math.tanh(tau) ** (d - 1) / math.cosh(tau) ** 2


def pdc_norm(p: PdcParams) -> float:
    return sum(d * pdc_alpha(d, p.tau) ** 2 for d in range(1, p.d_max + 1))


def psi_minus(d: int) -> PureState:
    """``(1/sqrt d) sum_i (-1)^i |d-i-1, i>_A |i, d-i-1>_B``."""
    c = 1 / math.sqrt(d)
    return PureState(
        {((d - 1 - i, i), (i, d - 1 - i)): (-1) ** i * c for i in range(d)}, 2
    )


def _pdc_sum(p: PdcParams, component) -> PureState:
    total = PureState({}, 2)
    for d in range(1, p.d_max + 1):
        total = total + math.sqrt(d) * pdc_alpha(d, p.tau) * component(d)
    return total / math.sqrt(pdc_norm(p))


def pdc_truncated(p: PdcParams) -> PureState:
    return _pdc_sum(p, psi_minus)


def pdc_rotated(p: PdcParams) -> PureState:
    """Truncated PDC state after a pi/2 polarization rotation on mode B."""
    return apply_rotator(pdc_truncated(p), 1, math.pi / 2)


def pdc_rotated_closed_form(p: PdcParams) -> PureState:
    """``sum_d (-1)^(d-1) sqrt(d) alpha_d |psi^d> / sqrt(N)``."""
    return _pdc_sum(p, lambda d: (-1) ** (d - 1) * max_entangled(d))


def photon_component(state: PureState, n: int) -> PureState:
    """Unnormalized projection onto total photon number ``n``."""
    return PureState(
        {occ: a for occ, a in state.items() if sum(m + v for m, v in occ) == n},
        state.n_modes,
    )


def pdc_qutrit_prob(p: PdcParams) -> float:
    """Weight of the four-photon (two-qutrit) component, ``3 alpha_3^2 / N``."""
    return photon_component(pdc_rotated(p), 4).norm_sq()


# heralded two-qutrit state


def _mix_and_null(ab: PureState, cd: PureState) -> tuple[det.HeraldRecord, PureState]:
    """BS_AC, BS_BD, then null detections on C and D; returns (record, ABCD state)."""
    state = tensor(ab, cd)
    state = apply_bs(state, 0, 2)
    state = apply_bs(state, 1, 3)
    null_c = det.threshold_null(state, 2)
    if null_c.probability == 0:
        return det.HeraldRecord(0.0, PureState({}, 2), "null C, null D"), state
    null_d = det.threshold_null(null_c.state, 3)
    prob = det.chain(null_c, null_d)
    if prob == 0:
        return det.HeraldRecord(0.0, PureState({}, 2), "null C, null D"), state
    out = remove_mode(remove_mode(null_d.state, 3), 2)
    return det.HeraldRecord(prob, out, "null C, null D"), state


def _photon_number(state: PureState) -> int:
    dist = total_photons(state)
    if len(dist) != 1:
        raise ValueError(f"input has no definite photon number: {dist}")
    return next(iter(dist))


def herald_qutrit(input_ab: PureState, input_cd: PureState) -> det.HeraldRecord:
    """Mix two photon pairs on two 50:50 beam splitters and herald on two nulls."""
    for name, s in (("AB", input_ab), ("CD", input_cd)):
        if s.n_modes != 2:
            raise ValueError(f"input_{name} must have two modes")
        if _photon_number(s) != 2:
            raise ValueError(f"input_{name} must carry exactly two photons")
    record, _ = _mix_and_null(input_ab, input_cd)
    return record


def herald_branch_amplitude(input_ab: PureState, input_cd: PureState) -> complex:
    """Amplitude of ``|psi^3>_AB |0,0>_C |0,0>_D`` in the mixed ABCD state."""
    _, state = _mix_and_null(input_ab, input_cd)
    target = tensor(max_entangled(3), vacuum(2))
    return sum((a.conjugate() * state[k] for k, a in target.items()), 0j)


@dataclass(frozen=True)
class UnbalancedParams:
    theta: float
    phi: float


def unbalanced_bell(p: UnbalancedParams) -> PureState:
    """``cos t |1,0>|1,0> + e^{i phi} sin t |0,1>|0,1>``."""
    return PureState(
        {
            ((1, 0), (1, 0)): math.cos(p.theta),
            ((0, 1), (0, 1)): np.exp(1j * p.phi) * math.sin(p.theta),
        },
        2,
    )


def unbalanced_norm(p: UnbalancedParams) -> float:
    return (5 + math.cos(p.phi) * math.sin(2 * p.theta)) / 4


def unbalanced_closed_form(p: UnbalancedParams) -> PureState:
    c, s = math.cos(p.theta), np.exp(1j * p.phi) * math.sin(p.theta)
    return two_qutrit_state(c, (c + s) / 2, s) / math.sqrt(unbalanced_norm(p))


def herald_unbalanced(p: UnbalancedParams) -> det.HeraldRecord:
    return herald_qutrit(unbalanced_bell(p), bell_pair())


def _circuit_phase() -> complex:
    # global phase the circuit imprints on the |2,0>|2,0> term (theta = 0)
    out = herald_unbalanced(UnbalancedParams(0.0, 0.0)).state
    a = out[((2, 0), (2, 0))]
    return a / abs(a)


def unbalanced_amplitudes(p: UnbalancedParams) -> QutritAmplitudes:
    """Heralded amplitudes (a0, a1, a2) with the circuit's fixed global phase removed."""
    out = herald_unbalanced(p).state
    ref = _circuit_phase().conjugate()
    return QutritAmplitudes(*(ref * out[(q, q)] for q in QUTRIT_BASIS))


# qudit nesting


@dataclass(frozen=True)
class NestResult:
    record: det.HeraldRecord
    step_probabilities: list[float]
    cumulative_probability: float


def nest_step_probability(d: int) -> float:
    """``d(d-1) / 2^(2d-1)``, heralding probability of the step producing ``|psi^d>``."""
    return d * (d - 1) / 2 ** (2 * d - 1)


def nest_qudit(d: int) -> NestResult:
    """Grow ``|psi^2>`` to ``|psi^d>`` by repeated mixing with fresh Bell pairs."""
    if not 3 <= d <= 6:
        raise ValueError(f"d must be in 3..6, got {d}")
    state = bell_pair()
    steps = []
    for _ in range(3, d + 1):
        record, _ = _mix_and_null(state, bell_pair())
        steps.append(record.probability)
        state = record.state
    cumulative = math.prod(steps)
    return NestResult(det.HeraldRecord(cumulative, state, f"psi^{d}"), steps, cumulative)


# heralded Bell-pair generator


@dataclass(frozen=True)
class HbpgBranch:
    pattern: tuple[tuple[int, int], tuple[int, int]]  # (D_A1, D_B1') counts
    probability: float
    state: PureState
    correction: np.ndarray  # polarization unitary applied to mode B
    corrected: PureState
    bell_fidelity: float


@dataclass(frozen=True)
class HbpgResult:
    branches: list[HbpgBranch]

    @property
    def probability(self) -> float:
        return sum(b.probability for b in self.branches)

    @property
    def min_fidelity(self) -> float:
        return min(b.bell_fidelity for b in self.branches)


def hbpg_prefusion() -> PureState:
    """Four H photons, U(pi/4) on each, then PBS(A1, A1') and PBS(B1, B1')."""
    state = PureState({((1, 0),) * 4: 1.0}, 4)
    for mode in range(4):
        state = apply_rotator(state, mode, QUARTER)
    state = apply_pbs(state, 2, 0)
    return apply_pbs(state, 1, 3)


def _one_photon_block(state: PureState) -> np.ndarray:
    idx = {(1, 0): 0, (0, 1): 1}
    m = np.zeros((2, 2), dtype=complex)
    for (a, b), amp in state.items():
        if a in idx and b in idx:
            m[idx[a], idx[b]] = amp
    return m


def _bell_correction(state: PureState) -> np.ndarray:
    """Polarization unitary on B mapping the one-photon-each part onto ``|psi^2>``."""
    m = _one_photon_block(state)
    # sum M_ij |i>|j>  --(V on B)-->  M V^T; choose V^T = polar factor of M^dag
    u, _, vh = np.linalg.svd(m.conj().T)
    return (u @ vh).T


def hbpg() -> HbpgResult:
    """Type-II fusion of two PBS-made pairs; one photon in each detector is accepted."""
    state = hbpg_prefusion()
    state = apply_pbs(state, 2, 3)
    state = apply_rotator(state, 2, QUARTER)
    state = apply_rotator(state, 3, QUARTER)
    branches = []
    for pa in ((1, 0), (0, 1)):
        for pb in ((1, 0), (0, 1)):
            r_b = det.postselect_counts(state, 3, *pb)
            if r_b.probability == 0:
                continue
            r_a = det.postselect_counts(r_b.state, 2, *pa)
            prob = det.chain(r_b, r_a)
            if prob == 0:
                continue
            corr = _bell_correction(r_a.state)
            fixed = apply_polarization_unitary(r_a.state, 1, corr)
            branches.append(
                HbpgBranch((pa, pb), prob, r_a.state, corr, fixed, fidelity(fixed, bell_pair()))
            )
    return HbpgResult(branches)


# unbalanced 2-1-2 resource and teleportation


def qutrit_bell_minus() -> PureState:
    """``(|00> - |22>)/sqrt 2``, the unbalanced family at theta=pi/4, phi=pi."""
    r = 1 / math.sqrt(2)
    return two_qutrit_state(r, 0, -r)


def qutrit_bell_plus() -> PureState:
    """``(|00> + |22>)/sqrt 2``."""
    r = 1 / math.sqrt(2)
    return two_qutrit_state(r, 0, r)


def weighted_bell_pair() -> PureState:
    """``(4|1,0>|1,0> + |0,1>|0,1>)/sqrt 17``."""
    r = 1 / math.sqrt(17)
    return PureState({((1, 0), (1, 0)): 4 * r, ((0, 1), (0, 1)): r}, 2)


def resource_212() -> PureState:
    """``(2|00> + |11> + 2|22>)/3``, the teleportation resource."""
    return two_qutrit_state(2 / 3, 1 / 3, 2 / 3)


def fix_relative_phase(state: PureState) -> PureState:
    """Flip the sign of ``|0,2>`` on mode A: PBS to an ancilla, pi/2 on its V path, PBS back."""
    s = tensor(state, vacuum(1))
    aux = s.n_modes - 1
    s = apply_pbs(s, 0, aux)
    s = apply_phase(s, aux, 0.0, math.pi / 2)
    s = apply_pbs(s, 0, aux)
    return remove_mode(s, aux)


def build_unbalanced_212() -> det.HeraldRecord:
    """``(2|00> + |11> + 2|22>)/3`` from the sign-fixed qutrit Bell state and a weighted Bell pair."""
    s1 = fix_relative_phase(qutrit_bell_minus())
    if abs(fidelity(s1, qutrit_bell_plus()) - 1) > 1e-12:
        raise RuntimeError("phase-fixing step did not reach (|00> + |22>)/sqrt 2")
    state = tensor(s1, weighted_bell_pair())
    state = apply_bs(state, 0, 2)
    state = apply_bs(state, 1, 3)
    r_d = det.postselect_counts(state, 3, 1, 0)
    r_c = det.postselect_counts(r_d.state, 2, 1, 0)
    return det.HeraldRecord(det.chain(r_d, r_c), r_c.state, "H in C, H in D")


Pattern = tuple[tuple[int, int], tuple[int, int]]


def _teleport_branches(resource: PureState, amps: np.ndarray) -> dict[Pattern, np.ndarray]:
    """Unnormalized mode-A qutrit vector for every (B, C) counting outcome."""
    state = tensor(resource, single_qutrit(amps))
    state = apply_pbs(state, 1, 2)
    state = apply_rotator(state, 1, QUARTER)
    state = apply_rotator(state, 2, QUARTER)
    out: dict[Pattern, np.ndarray] = {}
    index = {q: i for i, q in enumerate(QUTRIT_BASIS)}
    for (a, b, c), amp in state.items():
        if sum(b) + sum(c) != 4:
            continue
        vec = out.setdefault((b, c), np.zeros(3, dtype=complex))
        vec[index[a]] += amp
    return out


@dataclass(frozen=True)
class TeleportPattern:
    pattern: Pattern
    transfer: np.ndarray  # 3x3 map from input amplitudes to mode-A amplitudes
    weight: float  # conclusive probability of this pattern (0 if inconclusive)
    correction: np.ndarray | None


def teleport_patterns(resource: PureState | None = None, tol: float = 1e-12) -> list[TeleportPattern]:
    """Classify detection patterns by running the three basis inputs.

    A pattern is conclusive when its transfer map ``T`` satisfies
    ``T^dag T = w I``; its correction is the unitary ``T^-1 sqrt(w)``.
    """
    resource = resource_212() if resource is None else resource
    transfer: dict[Pattern, np.ndarray] = {}
    for j in range(3):
        for pat, vec in _teleport_branches(resource, np.eye(3)[j]).items():
            transfer.setdefault(pat, np.zeros((3, 3), dtype=complex))[:, j] = vec
    result = []
    for pat in sorted(transfer):
        t = transfer[pat]
        gram = t.conj().T @ t
        w = float(np.trace(gram).real / 3)
        if w > tol and np.allclose(gram, w * np.eye(3), atol=tol, rtol=0):
            result.append(TeleportPattern(pat, t, w, np.linalg.inv(t) * math.sqrt(w)))
        else:
            result.append(TeleportPattern(pat, t, 0.0, None))
    return result


@dataclass(frozen=True)
class TeleportBranch:
    pattern: Pattern
    probability: float
    output: QutritAmplitudes
    fidelity: float


@dataclass(frozen=True)
class TeleportResult:
    conclusive_probability: float
    branches: list[TeleportBranch]
    total_probability: float = field(default=1.0)


def teleport(inp: QutritAmplitudes) -> TeleportResult:
    """Teleport a two-photon qutrit from mode C to mode A through the unbalanced resource."""
    v = inp.as_array()
    if abs(np.vdot(v, v).real - 1) > 1e-12:
        raise ValueError("teleport input must be normalized")
    patterns = {p.pattern: p for p in teleport_patterns()}
    raw = _teleport_branches(resource_212(), v)
    branches = []
    conclusive = 0.0
    total = 0.0
    for pat, vec in sorted(raw.items()):
        p = float(np.vdot(vec, vec).real)
        total += p
        info = patterns[pat]
        if info.correction is None or p < det.ZERO_BRANCH_TOL:
            continue
        out = info.correction @ vec
        out = out / np.linalg.norm(out)
        conclusive += p
        branches.append(
            TeleportBranch(pat, p, QutritAmplitudes.from_array(out), abs(np.vdot(v, out)) ** 2)
        )
    return TeleportResult(conclusive, branches, total)
