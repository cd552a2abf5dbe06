"""Sparse multimode bosonic Fock states and dual-rail polarization qubits.

A state is a map from occupation vectors (one photon count per optical
mode) to complex amplitudes. Modes may be grouped into temporal bins of
``modes_per_bin`` modes each; bin ``b`` holds copies of the base modes at
indices ``b * modes_per_bin + m``. Single-bin states are the common case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

PRUNE_TOL = 1e-14
DEFAULT_PHOTON_CAP = 8

Occupation = tuple[int, ...]


class PhotonCapExceeded(ValueError):
    """Raised when a state would hold more photons than its cap."""


@dataclass(frozen=True)
class QubitSlot:
    """A polarization qubit: one photon shared between an H rail and a V rail."""

    h_mode: int
    v_mode: int

    def __post_init__(self):
        if self.h_mode == self.v_mode:
            raise ValueError("h_mode and v_mode must differ")
        if self.h_mode < 0 or self.v_mode < 0:
            raise ValueError("mode indices must be non-negative")

    @property
    def modes(self) -> tuple[int, int]:
        return (self.h_mode, self.v_mode)

    def shifted(self, offset: int) -> "QubitSlot":
        return QubitSlot(self.h_mode + offset, self.v_mode + offset)


@dataclass(frozen=True)
class FockState:
    """Immutable sparse Fock state.

    States need not be normalized: gate simulations carry unnormalized
    branches whose squared norm is a probability. A state with no
    amplitudes is the empty marker returned by zero-probability
    conditioning.
    """

    mode_count: int
    amplitudes: Mapping[Occupation, complex]
    photon_cap: int = DEFAULT_PHOTON_CAP
    modes_per_bin: int | None = None

    def __post_init__(self):
        cleaned: dict[Occupation, complex] = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(c) for c in occ)
            if len(occ) != self.mode_count:
                raise ValueError(
                    f"occupation {occ} has {len(occ)} modes, expected {self.mode_count}"
                )
            if any(c < 0 for c in occ):
                raise ValueError(f"negative photon count in {occ}")
            if sum(occ) > self.photon_cap:
                raise PhotonCapExceeded(
                    f"occupation {occ} exceeds photon cap {self.photon_cap}"
                )
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                cleaned[occ] = amp
        object.__setattr__(self, "amplitudes", MappingProxyType(cleaned))
        mpb = self.mode_count if self.modes_per_bin is None else self.modes_per_bin
        if self.mode_count and (mpb <= 0 or self.mode_count % mpb):
            raise ValueError("mode_count must be a multiple of modes_per_bin")
        object.__setattr__(self, "modes_per_bin", mpb)

    @property
    def bins(self) -> int:
        return self.mode_count // self.modes_per_bin if self.modes_per_bin else 1

    @property
    def is_empty(self) -> bool:
        return not self.amplitudes

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero-norm state")
        return self.with_amplitudes({k: a / n for k, a in self.amplitudes.items()})

    def scaled(self, factor: complex) -> "FockState":
        return self.with_amplitudes({k: a * factor for k, a in self.amplitudes.items()})

    def with_amplitudes(self, amplitudes: Mapping[Occupation, complex]) -> "FockState":
        return FockState(self.mode_count, amplitudes, self.photon_cap, self.modes_per_bin)

    def photon_numbers(self) -> set[int]:
        return {sum(k) for k in self.amplitudes}

    def amplitude(self, occupation: Iterable[int]) -> complex:
        return self.amplitudes.get(tuple(occupation), 0j)

    def bin_modes(self, mode: int) -> list[int]:
        """Indices of ``mode`` in every temporal bin."""
        return [mode + b * self.modes_per_bin for b in range(self.bins)]

    def __add__(self, other: "FockState") -> "FockState":
        if other.mode_count != self.mode_count:
            raise ValueError("mode-count mismatch")
        amps = dict(self.amplitudes)
        for k, a in other.amplitudes.items():
            amps[k] = amps.get(k, 0j) + a
        return self.with_amplitudes(amps)

    def __repr__(self):
        terms = " + ".join(
            f"({a.real:+.4g}{a.imag:+.4g}j)|{','.join(map(str, k))}>"
            for k, a in sorted(self.amplitudes.items())
        )
        return f"FockState[{self.mode_count}]({terms or 'empty'})"


def make_basis_state(counts: Iterable[int], photon_cap: int = DEFAULT_PHOTON_CAP) -> FockState:
    counts = tuple(int(c) for c in counts)
    return FockState(len(counts), {counts: 1.0}, photon_cap)


def vacuum(mode_count: int, photon_cap: int = DEFAULT_PHOTON_CAP) -> FockState:
    return FockState(mode_count, {(0,) * mode_count: 1.0}, photon_cap)


def superpose(terms: Iterable[tuple[Iterable[int], complex]],
              photon_cap: int = DEFAULT_PHOTON_CAP) -> FockState:
    """Normalized linear combination; repeated occupations are summed first."""
    amps: dict[Occupation, complex] = {}
    mode_count = None
    for occ, amp in terms:
        occ = tuple(int(c) for c in occ)
        if mode_count is None:
            mode_count = len(occ)
        elif len(occ) != mode_count:
            raise ValueError("all terms must share a mode count")
        amps[occ] = amps.get(occ, 0j) + complex(amp)
    if mode_count is None:
        raise ValueError("superpose needs at least one term")
    state = FockState(mode_count, amps, photon_cap)
    if state.norm() < PRUNE_TOL:
        raise ValueError("linear combination has zero norm")
    return state.normalized()


def tensor(a: FockState, b: FockState) -> FockState:
    if a.bins > 1 or b.bins > 1:
        raise ValueError("tensor is defined for single-bin states only")
    cap = max(a.photon_cap, b.photon_cap)
    amps = {ka + kb: xa * xb for ka, xa in a.amplitudes.items() for kb, xb in b.amplitudes.items()}
    return FockState(a.mode_count + b.mode_count, amps, cap)


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.mode_count != b.mode_count:
        raise ValueError("mode-count mismatch")
    small, large = (a, b) if len(a.amplitudes) <= len(b.amplitudes) else (b, a)
    total = 0j
    for k in small.amplitudes:
        if k in large.amplitudes:
            total += a.amplitudes[k].conjugate() * b.amplitudes[k]
    return total


def _check_slot(slot: QubitSlot, mode_count: int):
    if max(slot.modes) >= mode_count:
        raise ValueError(f"slot {slot} out of range for {mode_count} modes")


def encode_qubit(alpha: complex, beta: complex, slot: QubitSlot, state_size: int,
                 photon_cap: int = DEFAULT_PHOTON_CAP) -> FockState:
    """alpha|1_H 0_V> + beta|0_H 1_V> on ``slot``, vacuum on every other mode."""
    _check_slot(slot, state_size)
    if abs(alpha) ** 2 + abs(beta) ** 2 <= 0:
        raise ValueError("degenerate qubit amplitudes (0, 0)")
    zero = [0] * state_size
    h = list(zero)
    h[slot.h_mode] = 1
    v = list(zero)
    v[slot.v_mode] = 1
    terms = [(h, alpha), (v, beta)]
    amps = {tuple(o): a for o, a in terms if abs(a) > 0}
    return FockState(state_size, amps, photon_cap).normalized()


def make_bell_ancilla(slot1: QubitSlot, slot2: QubitSlot, state_size: int,
                      photon_cap: int = DEFAULT_PHOTON_CAP) -> FockState:
    """(|0,0> + |1,1>)/sqrt(2) in logical encoding on two disjoint slots."""
    if set(slot1.modes) & set(slot2.modes):
        raise ValueError("Bell ancilla slots overlap")
    _check_slot(slot1, state_size)
    _check_slot(slot2, state_size)
    amps = {}
    for bit in (0, 1):
        occ = [0] * state_size
        occ[slot1.modes[bit]] = 1
        occ[slot2.modes[bit]] = 1
        amps[tuple(occ)] = 1 / math.sqrt(2)
    return FockState(state_size, amps, photon_cap)


def slot_photons(state: FockState, occupation: Occupation, slot: QubitSlot) -> tuple[int, int]:
    """(H count, V count) of ``slot`` summed over temporal bins."""
    h = sum(occupation[m] for m in state.bin_modes(slot.h_mode))
    v = sum(occupation[m] for m in state.bin_modes(slot.v_mode))
    return h, v


def logical_distribution(state: FockState, slots: list[QubitSlot]) -> dict[str, float]:
    """Probabilities of logical bit strings over ``slots`` in the H/V basis.

    Terms where a slot does not hold exactly one photon are collected
    under the key ``"invalid"``.
    """
    out: dict[str, float] = {}
    for occ, amp in state.amplitudes.items():
        bits = []
        for slot in slots:
            h, v = slot_photons(state, occ, slot)
            if h + v != 1:
                bits = None
                break
            bits.append("1" if v else "0")
        key = "invalid" if bits is None else "".join(bits)
        out[key] = out.get(key, 0.0) + abs(amp) ** 2
    return out


__all__ = [
    "DEFAULT_PHOTON_CAP",
    "FockState",
    "PhotonCapExceeded",
    "PRUNE_TOL",
    "QubitSlot",
    "encode_qubit",
    "inner_product",
    "logical_distribution",
    "make_basis_state",
    "make_bell_ancilla",
    "slot_photons",
    "superpose",
    "tensor",
    "vacuum",
]
