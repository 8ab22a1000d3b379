"""Ideal detectors: threshold (vacuum vs. click) and polarization-resolved counting."""

from __future__ import annotations

from dataclasses import dataclass

from .fock import PureState, empty_state, remove_mode

ZERO_BRANCH_TOL = 1e-13


@dataclass(frozen=True)
class HeraldRecord:
    """Normalized conditional state and the probability of the heralding outcome.

    ``probability == 0`` marks an impossible branch; ``state`` is then the
    zero vector.
    """

    probability: float
    state: PureState
    outcome_label: str = ""


def _record(projected: PureState, label: str, prob_scale: float = 1.0) -> HeraldRecord:
    p = projected.norm_sq() * prob_scale
    if projected.norm() < ZERO_BRANCH_TOL:
        return HeraldRecord(0.0, empty_state(projected.n_modes), label)
    return HeraldRecord(p, projected.normalized(), label)


def _project(state: PureState, mode: int, keep) -> PureState:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    return PureState(
        {occ: amp for occ, amp in state.items() if keep(occ[mode])}, state.n_modes
    )


def threshold_null(state: PureState, mode: int) -> HeraldRecord:
    """No click on ``mode``; the mode stays in the state (as vacuum)."""
    scale = 1 / state.norm_sq()
    return _record(_project(state, mode, lambda mn: mn == (0, 0)), f"null[{mode}]", scale)


def threshold_click(state: PureState, mode: int) -> HeraldRecord:
    scale = 1 / state.norm_sq()
    return _record(_project(state, mode, lambda mn: mn != (0, 0)), f"click[{mode}]", scale)


def count_photons(state: PureState, mode: int) -> dict[tuple[int, int], float]:
    """Outcome distribution ``{(m, n): p}`` of a polarization-resolved counter."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    total = state.norm_sq()
    dist: dict[tuple[int, int], float] = {}
    for occ, amp in state.items():
        dist[occ[mode]] = dist.get(occ[mode], 0.0) + abs(amp) ** 2 / total
    return dict(sorted(dist.items()))


def postselect_counts(state: PureState, mode: int, m: int, n: int) -> HeraldRecord:
    """Detect exactly ``(m, n)`` photons on ``mode``; the mode is removed."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")
    scale = 1 / state.norm_sq()
    kept = {}
    for occ, amp in state.items():
        if occ[mode] == (m, n):
            kept[occ[:mode] + ((0, 0),) + occ[mode + 1 :]] = amp
    projected = remove_mode(PureState(kept, state.n_modes), mode)
    return _record(projected, f"count[{mode}]=({m},{n})", scale)


def chain(*records: HeraldRecord) -> float:
    """Joint probability of sequential heralds (product of conditionals)."""
    p = 1.0
    for r in records:
        p *= r.probability
    return p
