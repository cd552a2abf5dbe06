"""Text circuit format: parse, print, elaborate to a mode-level plan, and run.

The format is line oriented, ``#`` starts a comment, tokens are separated
by whitespace::

    qubit <label> <re(a)> <im(a)> <re(b)> <im(b)>
    bell <label1> <label2>
    element <bs r|pbs|rot theta|phase phi|loss eta> <target> [<target>]
    gate <parity_check|xor|encoder|cnot> <in...> -> <out...>
    detect <label> <hv|diag> <count>
    measure <label> <hv|diag>

A target is ``label.h`` or ``label.v`` for one rail, or a bare ``label``
for the whole (H, V) pair (``pbs`` and ``rot`` take bare labels).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

from .fock import (
    DEFAULT_PHOTON_CAP,
    FockState,
    QubitSlot,
    encode_qubit,
    logical_distribution,
    make_bell_ancilla,
    tensor,
    vacuum,
)
from .gates import GATE_BUILDERS, ancilla_state, get_gate
from .measurement import DIAGONAL, DetectionPattern, PauliCorrection, apply_pauli, filter_pattern, rotate_to_basis
from .optics import ElementSpec, ModeUnitary, apply_unitary, element_unitary, loss_channel

MAX_DIAGNOSTICS = 10
BASES = {"hv": 0.0, "diag": DIAGONAL}
GATE_ARITY = {"parity_check": (2, 1), "xor": (2, 1), "encoder": (1, 2), "cnot": (2, 2)}
ELEMENT_KINDS = {
    # kind: (parameter count, allowed target counts)
    "bs": (1, (2,)),
    "pbs": (0, (2,)),
    "rot": (1, (1, 2)),
    "phase": (1, (1,)),
    "loss": (1, (1,)),
}
_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TARGET = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\.([hv]))?\Z")


@dataclass(frozen=True)
class QubitDecl:
    label: str
    alpha: complex
    beta: complex
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BellDecl:
    label1: str
    label2: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ElementStmt:
    kind: str
    params: tuple[float, ...]
    targets: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GateStmt:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DetectStmt:
    label: str
    basis: str
    count: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MeasureStmt:
    label: str
    basis: str
    line: int = field(default=0, compare=False)


Statement = QubitDecl | BellDecl | ElementStmt | GateStmt | DetectStmt | MeasureStmt


@dataclass(frozen=True)
class CircuitAst:
    statements: tuple[Statement, ...]

    def __len__(self):
        return len(self.statements)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    category: str
    message: str

    def __str__(self):
        return f"line {self.line}, col {self.column}: {self.category}: {self.message}"


class CircuitParseError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ElaborationError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class _LineError(Exception):
    def __init__(self, column, category, message):
        self.column, self.category, self.message = column, category, message


def _number(tok) -> float:
    text, col = tok
    try:
        value = float(text)
    except ValueError:
        raise _LineError(col, "bad-number", f"{text!r} is not a number") from None
    if not math.isfinite(value):
        raise _LineError(col, "bad-number", f"{text!r} is not finite")
    return value


def _new_label(tok, declared: set[str]) -> str:
    text, col = tok
    if not _LABEL.match(text):
        raise _LineError(col, "syntax", f"invalid label {text!r}")
    if text in declared:
        raise _LineError(col, "duplicate-label", f"label {text!r} already declared")
    return text


def _known_label(tok, declared: set[str], bare_only: bool = False) -> str:
    text, col = tok
    m = _TARGET.match(text)
    if not m or (bare_only and m.group(2)):
        raise _LineError(col, "syntax", f"invalid reference {text!r}")
    if m.group(1) not in declared:
        raise _LineError(col, "unresolved-label", f"label {m.group(1)!r} is not declared")
    return text


def _expect(tokens, n, what):
    if len(tokens) != n:
        col = tokens[min(len(tokens), n) - 1][1] if tokens else 1
        raise _LineError(col, "syntax", f"{what} takes {n - 1} arguments, got {len(tokens) - 1}")


def _basis(tok) -> str:
    if tok[0] not in BASES:
        raise _LineError(tok[1], "syntax", f"basis must be hv or diag, got {tok[0]!r}")
    return tok[0]


def _parse_line(tokens, lineno: int, declared: set[str]) -> Statement:
    head, col = tokens[0]
    if head == "qubit":
        _expect(tokens, 6, "qubit")
        label = _new_label(tokens[1], declared)
        re_a, im_a, re_b, im_b = (_number(t) for t in tokens[2:])
        alpha, beta = complex(re_a, im_a), complex(re_b, im_b)
        if alpha == 0 and beta == 0:
            raise _LineError(tokens[2][1], "bad-number", "qubit amplitudes are both zero")
        declared.add(label)
        return QubitDecl(label, alpha, beta, lineno)
    if head == "bell":
        _expect(tokens, 3, "bell")
        l1 = _new_label(tokens[1], declared)
        l2 = _new_label(tokens[2], declared | {l1})
        declared.update((l1, l2))
        return BellDecl(l1, l2, lineno)
    if head == "element":
        if len(tokens) < 2:
            raise _LineError(col, "syntax", "element needs a kind")
        kind, kcol = tokens[1]
        if kind not in ELEMENT_KINDS:
            raise _LineError(kcol, "unknown-keyword", f"unknown element kind {kind!r}")
        n_params, n_targets = ELEMENT_KINDS[kind]
        rest = tokens[2:]
        if len(rest) - n_params not in n_targets:
            raise _LineError(kcol, "syntax", f"wrong number of arguments for element {kind}")
        params = tuple(_number(t) for t in rest[:n_params])
        bare = kind == "pbs" or (kind == "rot" and len(rest) - n_params == 1)
        targets = tuple(_known_label(t, declared, bare_only=bare) for t in rest[n_params:])
        if kind in ("bs",) and any("." not in t for t in targets):
            raise _LineError(rest[n_params][1], "syntax", "bs targets must be single rails (label.h or label.v)")
        if kind in ("phase", "loss") and "." not in targets[0]:
            raise _LineError(rest[n_params][1], "syntax", f"{kind} target must be a single rail")
        return ElementStmt(kind, params, targets, lineno)
    if head == "gate":
        texts = [t for t, _ in tokens]
        if "->" not in texts:
            raise _LineError(col, "syntax", "gate needs '->' between inputs and outputs")
        arrow = texts.index("->")
        if arrow < 2:
            raise _LineError(col, "syntax", "gate needs a name")
        name, ncol = tokens[1]
        if not _LABEL.match(name):
            raise _LineError(ncol, "syntax", f"invalid gate name {name!r}")
        ins, outs = tokens[2:arrow], tokens[arrow + 1:]
        if not ins or not outs:
            raise _LineError(tokens[arrow][1], "syntax", "gate needs inputs and outputs")
        inputs = tuple(_known_label(t, declared, bare_only=True) for t in ins)
        outputs = []
        for t in outs:
            outputs.append(_new_label(t, declared | set(outputs)))
        declared.update(outputs)
        return GateStmt(name, inputs, tuple(outputs), lineno)
    if head == "detect":
        _expect(tokens, 4, "detect")
        label = _known_label(tokens[1], declared, bare_only=True)
        basis = _basis(tokens[2])
        text, ccol = tokens[3]
        if not text.isdigit():
            raise _LineError(ccol, "bad-number", f"count must be a non-negative integer, got {text!r}")
        return DetectStmt(label, basis, int(text), lineno)
    if head == "measure":
        _expect(tokens, 3, "measure")
        label = _known_label(tokens[1], declared, bare_only=True)
        return MeasureStmt(label, _basis(tokens[2]), lineno)
    raise _LineError(col, "unknown-keyword", f"unknown statement {head!r}")


def parse_circuit(text: str) -> CircuitAst:
    """Parse circuit text; raises ``CircuitParseError`` with up to 10 diagnostics."""
    statements, diagnostics = [], []
    declared: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not tokens:
            continue
        try:
            statements.append(_parse_line(tokens, lineno, declared))
        except _LineError as err:
            diagnostics.append(Diagnostic(lineno, err.column, err.category, err.message))
            if len(diagnostics) >= MAX_DIAGNOSTICS:
                break
    if diagnostics:
        raise CircuitParseError(diagnostics)
    return CircuitAst(tuple(statements))


def _fmt(x: float) -> str:
    return repr(float(x))


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, QubitDecl):
        a, b = stmt.alpha, stmt.beta
        return f"qubit {stmt.label} {_fmt(a.real)} {_fmt(a.imag)} {_fmt(b.real)} {_fmt(b.imag)}"
    if isinstance(stmt, BellDecl):
        return f"bell {stmt.label1} {stmt.label2}"
    if isinstance(stmt, ElementStmt):
        return " ".join(["element", stmt.kind, *map(_fmt, stmt.params), *stmt.targets])
    if isinstance(stmt, GateStmt):
        return " ".join(["gate", stmt.name, *stmt.inputs, "->", *stmt.outputs])
    if isinstance(stmt, DetectStmt):
        return f"detect {stmt.label} {stmt.basis} {stmt.count}"
    if isinstance(stmt, MeasureStmt):
        return f"measure {stmt.label} {stmt.basis}"
    raise TypeError(f"not a circuit statement: {stmt!r}")


def format_circuit(ast: CircuitAst) -> str:
    return "".join(format_statement(s) + "\n" for s in ast.statements)


def bundled_circuit_text(name: str = "parity3.loqc") -> str:
    return resources.files("loqc.data").joinpath(name).read_text(encoding="utf-8")


def _qubit_amplitudes(value) -> tuple[complex, complex]:
    if value in (0, "0"):
        return (1, 0)
    if value in (1, "1"):
        return (0, 1)
    alpha, beta = value
    return complex(alpha), complex(beta)


def three_qubit_parity_circuit(inputs: Sequence = "000", basis: str = "hv") -> CircuitAst:
    """Two destructive XOR gates in series; measures the parity of three qubits.

    ``inputs`` holds one entry per qubit: a bit (``0``/``1``) or an
    ``(alpha, beta)`` pair.
    """
    qubits = tuple(
        QubitDecl(f"q{i}", *_qubit_amplitudes(v)) for i, v in enumerate(inputs)
    )
    if len(qubits) != 3:
        raise ValueError("the parity circuit takes exactly three inputs")
    return CircuitAst(qubits + (
        GateStmt("xor", ("q0", "q1"), ("t1",)),
        GateStmt("xor", ("t1", "q2"), ("t2",)),
        MeasureStmt("t2", basis),
    ))


def with_inputs(ast: CircuitAst, inputs: Mapping[str, object]) -> CircuitAst:
    """Copy of ``ast`` with the named qubit declarations re-prepared."""
    out = []
    for s in ast.statements:
        if isinstance(s, QubitDecl) and s.label in inputs:
            s = QubitDecl(s.label, *_qubit_amplitudes(inputs[s.label]), line=s.line)
        out.append(s)
    return CircuitAst(tuple(out))


@dataclass(frozen=True)
class PrepareStep:
    """Append ``state`` on fresh modes at the end of the register."""

    first_mode: int
    state: FockState


@dataclass(frozen=True)
class UnitaryStep:
    unitary: ModeUnitary
    placement: tuple[int, ...]
    label: str = ""


@dataclass(frozen=True)
class DetectStep:
    """Keep only accepted patterns on ``modes``, applying each pattern's corrections."""

    modes: tuple[int, ...]
    patterns: tuple[tuple[DetectionPattern, tuple[PauliCorrection, ...]], ...]
    gate_index: int | None = None
    label: str = ""


@dataclass(frozen=True)
class CircuitProgram:
    mode_count: int
    mode_table: Mapping[str, QubitSlot]
    steps: tuple
    measurements: tuple[tuple[str, QubitSlot, float], ...]
    gate_names: tuple[str, ...]
    photon_cap: int = DEFAULT_PHOTON_CAP

    @property
    def detectors(self) -> list[DetectStep]:
        return [s for s in self.steps if isinstance(s, DetectStep)]


@dataclass
class CircuitReport:
    acceptance_probability: float
    outputs: dict[str, float]
    per_gate_acceptance: list[float]

    def to_dict(self) -> dict:
        return {
            "acceptance_probability": self.acceptance_probability,
            "outputs": [{"value": v, "probability": p} for v, p in self.outputs.items()],
            "per_gate_acceptance": list(self.per_gate_acceptance),
        }


class _Elaborator:
    def __init__(self, connection_loss, photon_cap):
        self.modes = 0
        self.slots: dict[str, QubitSlot] = {}
        self.consumed: dict[str, int] = {}
        self.steps: list = []
        self.measurements: list = []
        self.gates: list[str] = []
        self.connection_loss = connection_loss
        self.photon_cap = photon_cap

    def allocate(self, state: FockState) -> int:
        first = self.modes
        self.steps.append(PrepareStep(first, state))
        self.modes += state.mode_count
        return first

    def use(self, label: str, line: int) -> QubitSlot:
        if label in self.consumed:
            raise ElaborationError(
                f"qubit {label!r} was consumed on line {self.consumed[label]}", line)
        if label not in self.slots:
            raise ElaborationError(f"label {label!r} is not declared", line)
        return self.slots[label]

    def target_modes(self, target: str, line: int) -> tuple[int, ...]:
        label, _, rail = target.partition(".")
        slot = self.use(label, line)
        if rail == "h":
            return (slot.h_mode,)
        if rail == "v":
            return (slot.v_mode,)
        return slot.modes

    def add_loss(self, eta: float, mode: int, label: str):
        env = self.allocate(vacuum(1, self.photon_cap))
        self.steps.append(UnitaryStep(element_unitary(loss_channel(eta, 0)), (mode, env), label))

    def statement(self, s: Statement):
        line = s.line
        if isinstance(s, QubitDecl):
            first = self.allocate(encode_qubit(s.alpha, s.beta, QubitSlot(0, 1), 2, self.photon_cap))
            self.slots[s.label] = QubitSlot(first, first + 1)
        elif isinstance(s, BellDecl):
            first = self.allocate(make_bell_ancilla(QubitSlot(0, 1), QubitSlot(2, 3), 4, self.photon_cap))
            self.slots[s.label1] = QubitSlot(first, first + 1)
            self.slots[s.label2] = QubitSlot(first + 2, first + 3)
        elif isinstance(s, ElementStmt):
            self.element(s)
        elif isinstance(s, GateStmt):
            self.gate(s)
        elif isinstance(s, DetectStmt):
            slot = self.use(s.label, line)
            angle = BASES[s.basis]
            patterns = tuple(
                (DetectionPattern((h, s.count - h), (angle,)), ()) for h in range(s.count + 1)
            )
            self.steps.append(DetectStep(slot.modes, patterns, None, s.label))
            self.consumed[s.label] = line
        elif isinstance(s, MeasureStmt):
            slot = self.use(s.label, line)
            self.measurements.append((s.label, slot, BASES[s.basis]))
            self.consumed[s.label] = line
        else:
            raise ElaborationError(f"unknown statement {s!r}", line)

    def element(self, s: ElementStmt):
        modes = tuple(m for t in s.targets for m in self.target_modes(t, s.line))
        kind = s.kind
        p = s.params[0] if s.params else None
        if kind == "loss":
            if not 0 <= p <= 1:
                raise ElaborationError(f"loss transmission {p} outside [0, 1]", s.line)
            self.add_loss(p, modes[0], "loss")
            return
        full = {"bs": "beam_splitter", "pbs": "polarizing_beam_splitter",
                "rot": "polarization_rotator", "phase": "phase_shifter"}[kind]
        try:
            spec = ElementSpec(full, modes, p)
        except ValueError as exc:
            raise ElaborationError(str(exc), s.line) from None
        self.steps.append(UnitaryStep(element_unitary(spec), spec.targets, kind))

    def gate(self, s: GateStmt):
        if s.name not in GATE_BUILDERS:
            raise ElaborationError(f"unknown gate {s.name!r}", s.line)
        n_in, n_out = GATE_ARITY[s.name]
        if (len(s.inputs), len(s.outputs)) != (n_in, n_out):
            raise ElaborationError(
                f"gate {s.name} takes {n_in} inputs and {n_out} outputs", s.line)
        if len(set(s.inputs)) != len(s.inputs):
            raise ElaborationError("a gate input is repeated", s.line)
        gate = get_gate(s.name)
        in_slots = [self.use(label, s.line) for label in s.inputs]
        if self.connection_loss is not None:
            for slot in in_slots:
                for m in slot.modes:
                    self.add_loss(self.connection_loss, m, "connection")
        anc = ancilla_state(gate)
        first = self.allocate(FockState(anc.mode_count, anc.amplitudes, self.photon_cap))
        mode_map = [m for slot in in_slots for m in slot.modes]
        mode_map += list(range(first, first + gate.mode_count - 2 * n_in))
        for spec in gate.elements:
            self.steps.append(UnitaryStep(
                element_unitary(spec), tuple(mode_map[t] for t in spec.targets), s.name))
        patterns = []
        for pattern in gate.accepted:
            fixes = tuple(
                PauliCorrection(QubitSlot(mode_map[c.target.h_mode], mode_map[c.target.v_mode]), c.op)
                for c in gate.correction_for(pattern)
            )
            patterns.append((pattern, fixes))
        self.steps.append(DetectStep(
            tuple(mode_map[m] for m in gate.detector_modes), tuple(patterns), len(self.gates), s.name))
        self.gates.append(s.name)
        for label in s.inputs:
            self.consumed[label] = s.line
        for label, slot in zip(s.outputs, gate.output_slots):
            self.slots[label] = QubitSlot(mode_map[slot.h_mode], mode_map[slot.v_mode])


def elaborate(ast: CircuitAst, connection_loss: float | None = None,
              photon_cap: int = DEFAULT_PHOTON_CAP) -> CircuitProgram:
    """Allocate modes and expand gates into elements, detectors and corrections.

    ``connection_loss`` puts a loss channel of that transmission on both
    rails of every gate input, standing in for lossy fiber links.
    """
    if connection_loss is not None and not 0.0 <= connection_loss <= 1.0:
        raise ValueError("connection_loss outside [0, 1]")
    el = _Elaborator(connection_loss, photon_cap)
    for s in ast.statements:
        el.statement(s)
    return CircuitProgram(
        mode_count=el.modes,
        mode_table=dict(el.slots),
        steps=tuple(el.steps),
        measurements=tuple(el.measurements),
        gate_names=tuple(el.gates),
        photon_cap=photon_cap,
    )


def run_circuit(program: CircuitProgram, seed: int | None = None) -> CircuitReport:
    """Exact amplitude-level run with post-selection on every detector.

    Detection patterns are enumerated, not sampled, so ``seed`` has no
    effect; it is accepted for interface symmetry with the sampling tools.
    """
    state = vacuum(0, program.photon_cap)
    per_gate = []
    for step in program.steps:
        if isinstance(step, PrepareStep):
            if step.first_mode != state.mode_count:
                raise RuntimeError("prepare step out of order")
            state = tensor(state, step.state)
        elif isinstance(step, UnitaryStep):
            state = apply_unitary(state, step.unitary, step.placement)
        elif isinstance(step, DetectStep):
            before = state.norm_squared()
            kept = state.with_amplitudes({})
            for pattern, fixes in step.patterns:
                branch = filter_pattern(state, step.modes, pattern)
                for c in fixes:
                    branch = apply_pauli(branch, c.target, c.op)
                kept = kept + branch
            state = kept
            if step.gate_index is not None:
                per_gate.append(state.norm_squared() / before if before > 0 else 0.0)
    acceptance = state.norm_squared()
    outputs: dict[str, float] = {}
    if acceptance > 0 and program.measurements:
        slots = [slot for _, slot, _ in program.measurements]
        rotated = state
        for _, slot, angle in program.measurements:
            rotated = rotate_to_basis(rotated, slot.modes, [angle])
        for value, p in logical_distribution(rotated, slots).items():
            outputs[value] = p / acceptance
        outputs = dict(sorted(outputs.items()))
    return CircuitReport(acceptance, outputs, per_gate)
