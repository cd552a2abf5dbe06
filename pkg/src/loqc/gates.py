"""Probabilistic polarization gates built from polarizing beam splitters.

Each gate takes logical qubits on its input slots, adds ancilla photons,
sends everything through linear optics and keeps only the runs in which
its detectors see an accepted pattern. Detector results that leave the
output in a known wrong state are fixed by Pauli feed-forward; the
correction for every accepted pattern is found by search against the
ideal logical map, never written by hand.

Local mode layout: input slot ``i`` occupies modes ``(2i, 2i + 1)``;
ancilla modes follow the inputs.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .fock import FockState, QubitSlot, make_bell_ancilla, tensor, vacuum, encode_qubit
from .measurement import (
    ACCEPT,
    DIAGONAL,
    FAIL,
    DetectionPattern,
    OutcomeClass,
    PauliCorrection,
    PAULI_OPS,
    apply_pauli,
    filter_pattern,
    pattern_distribution,
)
from .optics import ElementSpec, apply_unitary, element_unitary, make_distinguishable, pbs, rotator

FIDELITY_TOL = 1e-9
XOR_ROTATION = math.pi / 4


class NoValidCorrection(RuntimeError):
    """No Pauli correction restores the ideal map for some accepted pattern."""


@dataclass(frozen=True)
class Detector:
    """Polarization-resolving, number-resolving detector on one port."""

    slot: QubitSlot
    basis: float = 0.0


@dataclass(frozen=True, eq=False)
class GateDefinition:
    name: str
    mode_count: int
    input_slots: tuple[QubitSlot, ...]
    output_slots: tuple[QubitSlot, ...]
    elements: tuple[ElementSpec, ...]
    detectors: tuple[Detector, ...]
    ideal: np.ndarray
    bell_pairs: tuple[tuple[QubitSlot, QubitSlot], ...] = ()
    distinguishable: tuple[int, ...] = ()
    consumes: tuple[int, ...] = ()
    corrections: Mapping[DetectionPattern, tuple[PauliCorrection, ...]] | None = None

    def __post_init__(self):
        for i, slot in enumerate(self.input_slots):
            if slot.modes != (2 * i, 2 * i + 1):
                raise ValueError("input slot i must occupy modes (2i, 2i+1)")
        ideal = np.asarray(self.ideal, dtype=complex)
        if ideal.shape != (2 ** len(self.output_slots), 2 ** len(self.input_slots)):
            raise ValueError("ideal map shape does not match the slot counts")
        object.__setattr__(self, "ideal", ideal)

    @property
    def n_inputs(self) -> int:
        return len(self.input_slots)

    @property
    def detector_modes(self) -> list[int]:
        return [m for d in self.detectors for m in d.slot.modes]

    @property
    def accepted(self) -> list[DetectionPattern]:
        """Exactly one photon at every detector, in either analyzer output."""
        bases = tuple(d.basis for d in self.detectors)
        choices = itertools.product(((1, 0), (0, 1)), repeat=len(self.detectors))
        return [DetectionPattern(sum(c, ()), bases) for c in choices]

    def correction_for(self, pattern: DetectionPattern) -> tuple[PauliCorrection, ...]:
        if not self.corrections:
            return ()
        return self.corrections[pattern]


@dataclass
class GateRun:
    """Result of pushing one input state through a gate."""

    branches: dict[DetectionPattern, FockState]
    input_norm: float

    @property
    def acceptance(self) -> float:
        return sum(b.norm_squared() for b in self.branches.values()) / self.input_norm

    def output(self) -> FockState:
        """Corrected accepted component; detector records keep branches orthogonal."""
        states = list(self.branches.values())
        total = states[0]
        for s in states[1:]:
            total = total + s
        return total


@dataclass
class GateReport:
    gate: str
    overlap: float
    truth_table: dict[str, dict[str, float]]
    acceptance: dict[str, float]
    mean_acceptance: float
    truth_table_fidelity: float
    process_fidelity: float

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "overlap": self.overlap,
            "mean_acceptance": self.mean_acceptance,
            "truth_table_fidelity": self.truth_table_fidelity,
            "process_fidelity": self.process_fidelity,
            "rows": [
                {"input": i, "output": o, "conditional_probability": p,
                 "acceptance_probability": self.acceptance[i]}
                for i, row in self.truth_table.items() for o, p in row.items()
            ],
        }


def bits(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


def product_input(amplitudes: Sequence[tuple[complex, complex]]) -> FockState:
    """Product of single-qubit states on consecutive slots (0, 1), (2, 3), ..."""
    state = vacuum(0)
    for alpha, beta in amplitudes:
        state = tensor(state, encode_qubit(alpha, beta, QubitSlot(0, 1), 2))
    return state


def basis_input(value: str) -> FockState:
    return product_input([(0, 1) if b == "1" else (1, 0) for b in value])


def prepare(gate: GateDefinition, input_state: FockState, overlap: float = 1.0) -> FockState:
    if input_state.mode_count != 2 * gate.n_inputs:
        raise ValueError(
            f"{gate.name} expects {2 * gate.n_inputs} input modes, got {input_state.mode_count}"
        )
    state = tensor(input_state, ancilla_state(gate))
    for i in gate.distinguishable if overlap < 1.0 else ():
        state = make_distinguishable(state, gate.input_slots[i], overlap)
    return state


def ancilla_state(gate: GateDefinition) -> FockState:
    """State of the gate's non-input modes: Bell pairs where declared, vacuum elsewhere."""
    offset = 2 * gate.n_inputs
    extra = gate.mode_count - offset
    amps = dict(vacuum(extra).amplitudes)
    for s1, s2 in gate.bell_pairs:
        pair = make_bell_ancilla(s1.shifted(-offset), s2.shifted(-offset), extra)
        amps = _multiply_disjoint(amps, pair)
    return FockState(extra, amps)


def _multiply_disjoint(amps: dict, other: FockState) -> dict:
    out = {}
    for k1, a1 in amps.items():
        for k2, a2 in other.amplitudes.items():
            out[tuple(x + y for x, y in zip(k1, k2))] = a1 * a2
    return out


def propagate(gate: GateDefinition, state: FockState, mode_map: Sequence[int] | None = None) -> FockState:
    for spec in gate.elements:
        targets = spec.targets if mode_map is None else [mode_map[t] for t in spec.targets]
        state = apply_unitary(state, element_unitary(spec), targets)
    return state


def _mapped_slot(slot: QubitSlot, mode_map) -> QubitSlot:
    return slot if mode_map is None else QubitSlot(mode_map[slot.h_mode], mode_map[slot.v_mode])


def detect_and_correct(gate: GateDefinition, state: FockState, mode_map=None,
                       corrections: Mapping | None = None) -> dict[DetectionPattern, FockState]:
    """Accepted branches of ``state`` after feed-forward; detector modes are kept."""
    table = gate.corrections if corrections is None else corrections
    det_modes = [mode_map[m] for m in gate.detector_modes] if mode_map else gate.detector_modes
    out = {}
    for pattern in gate.accepted:
        branch = filter_pattern(state, det_modes, pattern)
        for c in (table or {}).get(pattern, ()):
            branch = apply_pauli(branch, _mapped_slot(c.target, mode_map), c.op)
        out[pattern] = branch
    return out


def simulate(gate: GateDefinition, input_state: FockState, overlap: float = 1.0,
             corrections: Mapping | None = None) -> GateRun:
    state = propagate(gate, prepare(gate, input_state, overlap))
    return GateRun(detect_and_correct(gate, state, corrections=corrections),
                   input_state.norm_squared())


def _logical_split(state: FockState, slots: Sequence[QubitSlot]):
    """Map amplitudes to ``(output_bits, rest)`` keys.

    ``rest`` records everything outside the output qubits, including which
    temporal bin each output photon occupies. Terms where an output slot
    does not hold exactly one photon get ``None`` bits.
    """
    out_modes = set()
    for s in slots:
        out_modes.update(state.bin_modes(s.h_mode))
        out_modes.update(state.bin_modes(s.v_mode))
    others = [i for i in range(state.mode_count) if i not in out_modes]
    mpb = state.modes_per_bin
    split = {}
    for occ, a in state.amplitudes.items():
        value, where = 0, []
        for s in slots:
            hs = [occ[i] for i in state.bin_modes(s.h_mode)]
            vs = [occ[i] for i in state.bin_modes(s.v_mode)]
            if sum(hs) + sum(vs) != 1:
                value = None
                break
            bit = 1 if sum(vs) else 0
            value = 2 * value + bit
            where.append((vs if bit else hs).index(1))
        rest = (tuple(occ[i] for i in others), tuple(where)) if value is not None else occ
        split[(value, rest)] = split.get((value, rest), 0j) + a
    return split


def process_fidelity(outputs: Sequence[FockState], ideal: np.ndarray,
                     slots: Sequence[QubitSlot]) -> float:
    """Fidelity of a linear map, given its images of every logical basis input, with ``ideal``.

    Maximized over the state left in non-output modes; a map that entangles
    the logical output with those modes scores below 1.
    """
    ideal = np.asarray(ideal, dtype=complex)
    overlap: dict = defaultdict(complex)
    actual_norm = 0.0
    for i, state in enumerate(outputs):
        actual_norm += state.norm_squared()
        for (value, rest), a in _logical_split(state, slots).items():
            if value is not None:
                overlap[rest] += np.conj(ideal[value, i]) * a
    ideal_norm = float(np.sum(np.abs(ideal) ** 2))
    if actual_norm == 0.0 or ideal_norm == 0.0:
        return 0.0
    return float(sum(abs(v) ** 2 for v in overlap.values()) / (ideal_norm * actual_norm))


def _branches_per_input(gate: GateDefinition, corrections=None, overlap: float = 1.0):
    runs = []
    for i in range(2 ** gate.n_inputs):
        runs.append(simulate(gate, basis_input(bits(i, gate.n_inputs)), overlap, corrections))
    return runs


def pattern_fidelities(gate: GateDefinition, corrections: Mapping | None = None) -> dict:
    """Per accepted pattern, fidelity of the conditional map with the ideal gate."""
    runs = _branches_per_input(gate, corrections={} if corrections is None else corrections)
    return {
        p: process_fidelity([r.branches[p] for r in runs], gate.ideal, gate.output_slots)
        for p in gate.accepted
    }


def derive_correction_table(gate: GateDefinition) -> GateDefinition:
    """Search {I, X, Z, XZ} on every output qubit for each accepted pattern.

    Raises ``NoValidCorrection`` when some pattern cannot reach fidelity 1.
    """
    if not gate.detectors:
        return replace(gate, corrections={})
    runs = _branches_per_input(gate, corrections={})
    combos = sorted(itertools.product(PAULI_OPS, repeat=len(gate.output_slots)),
                    key=lambda ops: sum(op != "I" for op in ops))
    table = {}
    for pattern in gate.accepted:
        raw = [r.branches[pattern] for r in runs]
        if all(b.is_empty for b in raw):
            raise NoValidCorrection(f"{gate.name}: accepted pattern {pattern.counts} never occurs")
        for ops in combos:
            fixed = []
            for b in raw:
                for slot, op in zip(gate.output_slots, ops):
                    b = apply_pauli(b, slot, op)
                fixed.append(b)
            if process_fidelity(fixed, gate.ideal, gate.output_slots) >= 1 - FIDELITY_TOL:
                table[pattern] = tuple(
                    PauliCorrection(slot, op) for slot, op in zip(gate.output_slots, ops) if op != "I"
                )
                break
        else:
            raise NoValidCorrection(f"{gate.name}: no correction for pattern {pattern.counts}")
    return replace(gate, corrections=table)


def _first_valid(name: str, candidates: Iterable[GateDefinition]) -> GateDefinition:
    """Derive corrections for each port assignment in turn; keep the first that works."""
    errors = []
    for gate in candidates:
        try:
            return derive_correction_table(gate)
        except NoValidCorrection as exc:
            errors.append(str(exc))
    raise NoValidCorrection(f"{name}: no port assignment admits corrections ({'; '.join(errors)})")


def _map_matrix(n_in: int, n_out: int, rule: Callable[[int], int | None]) -> np.ndarray:
    m = np.zeros((2 ** n_out, 2 ** n_in))
    for i in range(2 ** n_in):
        j = rule(i)
        if j is not None:
            m[j, i] = 1.0
    return m


PARITY_IDEAL = _map_matrix(2, 1, lambda i: {0b00: 0, 0b11: 1}.get(i))
XOR_IDEAL = _map_matrix(2, 1, lambda i: (i >> 1) ^ (i & 1))
ENCODER_IDEAL = _map_matrix(1, 2, lambda i: 0b11 * i)
CNOT_IDEAL = _map_matrix(2, 2, lambda i: i ^ (i >> 1))


def _xor_elements(control: QubitSlot, target: QubitSlot) -> tuple[ElementSpec, ...]:
    # PBS acting in the diagonal basis: rotate in, split, rotate back.
    return (
        rotator(XOR_ROTATION, control),
        rotator(XOR_ROTATION, target),
        pbs(target, control),
        rotator(-XOR_ROTATION, target),
        rotator(-XOR_ROTATION, control),
    )


def build_parity_check() -> GateDefinition:
    """Keep the even-parity part of two qubits; one photon survives carrying the common value."""
    a, b = QubitSlot(0, 1), QubitSlot(2, 3)

    def candidate(out: QubitSlot, det: QubitSlot) -> GateDefinition:
        return GateDefinition(
            name="parity_check", mode_count=4, input_slots=(a, b), output_slots=(out,),
            elements=(pbs(a, b),), detectors=(Detector(det, DIAGONAL),),
            ideal=PARITY_IDEAL, distinguishable=(1,), consumes=(1,),
        )

    return _first_valid("parity_check", [candidate(a, b), candidate(b, a)])


def build_destructive_xor() -> GateDefinition:
    """Output target XOR control on the target's modes; the control photon is consumed."""
    control, target = QubitSlot(0, 1), QubitSlot(2, 3)

    def candidate(out: QubitSlot, det: QubitSlot) -> GateDefinition:
        return GateDefinition(
            name="xor", mode_count=4, input_slots=(control, target), output_slots=(out,),
            elements=_xor_elements(control, target), detectors=(Detector(det, 0.0),),
            ideal=XOR_IDEAL, distinguishable=(0,), consumes=(0,),
        )

    return _first_valid("xor", [candidate(target, control), candidate(control, target)])


def build_encoder() -> GateDefinition:
    """Copy a qubit's value onto a second photon: a|0> + b|1> -> a|00> + b|11>."""
    q, a1, a2 = QubitSlot(0, 1), QubitSlot(2, 3), QubitSlot(4, 5)

    def candidate(out: QubitSlot, det: QubitSlot) -> GateDefinition:
        return GateDefinition(
            name="encoder", mode_count=6, input_slots=(q,), output_slots=(out, a2),
            elements=(pbs(q, a1),), detectors=(Detector(det, DIAGONAL),),
            ideal=ENCODER_IDEAL, bell_pairs=((a1, a2),), distinguishable=(0,),
        )

    return _first_valid("encoder", [candidate(q, a1), candidate(a1, q)])


def build_pbs_cnot() -> GateDefinition:
    """CNOT from an encoder on the control and a destructive XOR on the target.

    Two PBSs share a Bell-pair ancilla; success needs one photon at each of
    the two detectors, which happens with probability 1/4.
    """
    c, t, a1, a2 = QubitSlot(0, 1), QubitSlot(2, 3), QubitSlot(4, 5), QubitSlot(6, 7)

    def candidate(enc_out, enc_det, xor_out, xor_det) -> GateDefinition:
        return GateDefinition(
            name="cnot", mode_count=8, input_slots=(c, t), output_slots=(enc_out, xor_out),
            elements=(pbs(c, a1),) + _xor_elements(a2, t),
            detectors=(Detector(enc_det, DIAGONAL), Detector(xor_det, 0.0)),
            ideal=CNOT_IDEAL, bell_pairs=((a1, a2),), distinguishable=(0, 1),
        )

    return _first_valid("cnot", [
        candidate(eo, ed, xo, xd)
        for (eo, ed), (xo, xd) in itertools.product(((c, a1), (a1, c)), ((t, a2), (a2, t)))
    ])


def identity_gate(n_qubits: int = 1) -> GateDefinition:
    slots = tuple(QubitSlot(2 * i, 2 * i + 1) for i in range(n_qubits))
    return derive_correction_table(GateDefinition(
        name="identity", mode_count=2 * n_qubits, input_slots=slots, output_slots=slots,
        elements=(), detectors=(), ideal=np.eye(2 ** n_qubits),
    ))


GATE_BUILDERS = {
    "parity_check": build_parity_check,
    "xor": build_destructive_xor,
    "encoder": build_encoder,
    "cnot": build_pbs_cnot,
}

_GATE_CACHE: dict[str, GateDefinition] = {}


def get_gate(name: str) -> GateDefinition:
    """Built gate by name, with its derived correction table (cached)."""
    if name not in GATE_BUILDERS:
        raise KeyError(f"unknown gate {name!r}; known gates: {', '.join(GATE_BUILDERS)}")
    if name not in _GATE_CACHE:
        _GATE_CACHE[name] = GATE_BUILDERS[name]()
    return _GATE_CACHE[name]


def classify_outcomes(gate: GateDefinition, input_state: FockState) -> dict[OutcomeClass, float]:
    """Probability of accept, each correctable class, and fail for one input."""
    state = propagate(gate, prepare(gate, input_state))
    if not gate.detectors:
        return {ACCEPT: 1.0}
    bases = tuple(d.basis for d in gate.detectors)
    dist = pattern_distribution(state, gate.detector_modes, bases)
    out: dict[OutcomeClass, float] = defaultdict(float)
    for counts, p in dist.items():
        cls = FAIL
        for pattern in gate.accepted:
            if pattern.matches(counts):
                fix = gate.correction_for(pattern)
                cls = OutcomeClass("correctable", fix) if fix else ACCEPT
                break
        out[cls] += p
    return dict(out)


def truth_table(gate: GateDefinition, overlap: float = 1.0) -> GateReport:
    """Run every logical basis input; report conditional outputs and fidelities.

    With ``overlap < 1`` the gate's interfering input photons are made
    partially distinguishable from the ancillas.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap {overlap} outside [0, 1]")
    n_in, n_out = gate.n_inputs, len(gate.output_slots)
    runs = _branches_per_input(gate, overlap=overlap)
    table, acceptance, tt_fid = {}, {}, []
    for i, run in enumerate(runs):
        key = bits(i, n_in)
        acceptance[key] = run.acceptance
        row: dict[str, float] = {}
        if run.acceptance > 0:
            accepted = run.output()
            weight = accepted.norm_squared()
            for (value, _), a in _logical_split(accepted, gate.output_slots).items():
                label = "invalid" if value is None else bits(value, n_out)
                row[label] = row.get(label, 0.0) + abs(a) ** 2 / weight
        table[key] = dict(sorted(row.items()))
        col = np.abs(gate.ideal[:, i]) ** 2
        if col.sum() > 0:
            tt_fid.append(sum(row.get(bits(j, n_out), 0.0) * col[j] / col.sum()
                              for j in range(len(col))))
    return GateReport(
        gate=gate.name,
        overlap=overlap,
        truth_table=table,
        acceptance=acceptance,
        mean_acceptance=float(np.mean(list(acceptance.values()))),
        truth_table_fidelity=float(np.mean(tt_fid)),
        process_fidelity=process_fidelity([r.output() for r in runs], gate.ideal, gate.output_slots),
    )
