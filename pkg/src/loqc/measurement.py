"""Detectors, post-selection on detection patterns, and feed-forward corrections."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .fock import FockState, QubitSlot
from .optics import apply_element, loss_channel, rotator, apply_unitary, element_unitary

CLICK = "click"
PAULI_OPS = ("I", "X", "Z", "XZ")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    number_resolving: bool = True

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency {self.efficiency} outside [0, 1]")


@dataclass(frozen=True)
class DetectionPattern:
    """Required result per detector mode.

    Each entry of ``counts`` is an exact photon number or ``CLICK`` (at least
    one photon, as reported by a threshold detector). When ``bases`` is
    given, the detector modes are read as consecutive (H, V) pairs and
    ``bases[k]`` is the analyzer angle of pair ``k``: 0 measures H/V,
    pi/4 the diagonal basis. Counts then refer to the rotated rails.
    """

    counts: tuple
    bases: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))
        object.__setattr__(self, "bases", tuple(float(b) for b in self.bases))
        for c in self.counts:
            if c != CLICK and (not isinstance(c, int) or c < 0):
                raise ValueError(f"invalid detector requirement {c!r}")
        if self.bases and 2 * len(self.bases) != len(self.counts):
            raise ValueError("bases need one angle per (H, V) detector pair")

    def matches(self, observed: Sequence[int]) -> bool:
        return all(n >= 1 if c == CLICK else n == c for c, n in zip(self.counts, observed))


@dataclass(frozen=True)
class PauliCorrection:
    target: QubitSlot
    op: str

    def __post_init__(self):
        if self.op not in PAULI_OPS:
            raise ValueError(f"unknown Pauli correction {self.op!r}")


@dataclass(frozen=True)
class OutcomeClass:
    """One of the three kinds of gate outcome: accept, correctable, or fail."""

    tag: str
    corrections: tuple[PauliCorrection, ...] = ()

    def __post_init__(self):
        if self.tag not in ("accept", "correctable", "fail"):
            raise ValueError(f"unknown outcome tag {self.tag!r}")
        if self.tag == "correctable" and not self.corrections:
            raise ValueError("a correctable outcome needs at least one correction")


ACCEPT = OutcomeClass("accept")
FAIL = OutcomeClass("fail")


def _check_modes(state: FockState, modes: Sequence[int]):
    if len(set(modes)) != len(modes):
        raise ValueError(f"detector modes repeat: {list(modes)}")
    for m in modes:
        if not 0 <= m < state.modes_per_bin:
            raise ValueError(f"detector mode {m} out of range")


def rotate_to_basis(state: FockState, detector_modes: Sequence[int],
                    bases: Sequence[float]) -> FockState:
    """Turn each (H, V) detector pair so that its H rail carries the analyzer's pass axis."""
    for k, angle in enumerate(bases):
        if angle:
            pair = QubitSlot(detector_modes[2 * k], detector_modes[2 * k + 1])
            state = apply_unitary(state, element_unitary(rotator(-angle, pair)), pair.modes)
    return state


def observed_counts(state: FockState, occupation, modes: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(occupation[i] for i in state.bin_modes(m)) for m in modes)


def filter_pattern(state: FockState, detector_modes: Sequence[int],
                   pattern: DetectionPattern) -> FockState:
    """Unnormalized component of ``state`` matching ``pattern``; detector modes are kept."""
    detector_modes = list(detector_modes)
    _check_modes(state, detector_modes)
    if len(pattern.counts) != len(detector_modes):
        raise ValueError("pattern length does not match detector modes")
    rotated = rotate_to_basis(state, detector_modes, pattern.bases)
    return rotated.with_amplitudes({
        k: a for k, a in rotated.amplitudes.items()
        if pattern.matches(observed_counts(rotated, k, detector_modes))
    })


def project_pattern(state: FockState, detector_modes: Sequence[int],
                    pattern: DetectionPattern) -> tuple[FockState, float]:
    """Condition on ``pattern`` and drop the detector modes.

    Returns ``(conditional_state, probability)``. A zero-probability
    pattern returns an empty state (``is_empty``) rather than raising.
    """
    total = state.norm_squared()
    branch = filter_pattern(state, detector_modes, pattern)
    prob = branch.norm_squared() / total if total else 0.0
    keep_base = [m for m in range(state.modes_per_bin) if m not in set(detector_modes)]
    keep = [m + b * state.modes_per_bin for b in range(state.bins) for m in keep_base]
    amps: dict = {}
    for k, a in branch.amplitudes.items():
        reduced = tuple(k[i] for i in keep)
        if reduced in amps:
            raise ValueError("conditional state is mixed over temporal bins; use filter_pattern")
        amps[reduced] = a
    mpb = len(keep_base)
    cond = FockState(len(keep), amps, state.photon_cap, mpb if keep else None)
    if prob == 0.0:
        return cond, 0.0
    return cond.normalized(), prob


def pattern_distribution(state: FockState, detector_modes: Sequence[int],
                         bases: Sequence[float] = ()) -> dict[tuple[int, ...], float]:
    """Probability of every realized count tuple on ``detector_modes``."""
    detector_modes = list(detector_modes)
    _check_modes(state, detector_modes)
    rotated = rotate_to_basis(state, detector_modes, bases)
    total = rotated.norm_squared()
    out: dict[tuple[int, ...], float] = defaultdict(float)
    for k, a in rotated.amplitudes.items():
        out[observed_counts(rotated, k, detector_modes)] += abs(a) ** 2 / total
    return dict(out)


def apply_detector_loss(state: FockState, mode: int, model: DetectorModel) -> FockState:
    """Route the mode through a beam splitter of transmission ``model.efficiency``.

    The reflected light goes to a new environment mode appended to the state.
    """
    if model.efficiency == 1.0:
        return state
    return apply_element(state, loss_channel(model.efficiency, mode))


def click_probability(state: FockState, mode: int, model: DetectorModel) -> float:
    lossy = apply_detector_loss(state, mode, model)
    _, p = project_pattern(lossy, [mode], DetectionPattern((CLICK,)))
    return p


def _check_one_photon(state: FockState, slot: QubitSlot):
    hs, vs = state.bin_modes(slot.h_mode), state.bin_modes(slot.v_mode)
    for occ in state.amplitudes:
        if sum(occ[i] for i in hs) + sum(occ[i] for i in vs) != 1:
            raise ValueError(f"slot {slot} does not hold exactly one photon in term {occ}")


def apply_pauli(state: FockState, slot: QubitSlot, op: str) -> FockState:
    if op not in PAULI_OPS:
        raise ValueError(f"unknown Pauli correction {op!r}")
    if op == "I":
        return state
    hs, vs = state.bin_modes(slot.h_mode), state.bin_modes(slot.v_mode)
    amps = {}
    for occ, a in state.amplitudes.items():
        if "Z" in op and any(occ[i] for i in vs):
            a = -a
        if "X" in op:
            occ = list(occ)
            for h, v in zip(hs, vs):
                occ[h], occ[v] = occ[v], occ[h]
            occ = tuple(occ)
        amps[occ] = a
    return state.with_amplitudes(amps)


def apply_feedforward(state: FockState, corrections: Sequence[PauliCorrection]) -> FockState:
    """Apply Pauli corrections; X swaps the rails, Z flips the sign of V terms, XZ is Z then X."""
    for c in corrections:
        _check_one_photon(state, c.target)
        state = apply_pauli(state, c.target, c.op)
    return state


def measure_logical(state: FockState, slot: QubitSlot, basis_angle: float = 0.0) -> dict[int, float]:
    """Analyzer outcome probabilities for one qubit slot.

    Outcome 0 is the analyzer's pass axis ``cos(a)|H> + sin(a)|V>``.
    """
    rotated = rotate_to_basis(state, slot.modes, [basis_angle])
    hs, vs = rotated.bin_modes(slot.h_mode), rotated.bin_modes(slot.v_mode)
    total = rotated.norm_squared()
    dist = {0: 0.0, 1: 0.0}
    for occ, a in rotated.amplitudes.items():
        h = sum(occ[i] for i in hs)
        v = sum(occ[i] for i in vs)
        if h + v != 1:
            raise ValueError(f"slot {slot} is not a valid qubit in term {occ}")
        dist[1 if v else 0] += abs(a) ** 2 / total
    return dist


DIAGONAL = math.pi / 4
