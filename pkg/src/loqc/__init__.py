"""Exact few-photon simulation of linear-optics quantum gates."""

from .fock import (
    FockState,
    QubitSlot,
    encode_qubit,
    inner_product,
    make_basis_state,
    make_bell_ancilla,
    superpose,
    tensor,
)
from .optics import ElementSpec, ModeUnitary, element_unitary, embed, evolve, permanent
from .gates import (
    build_destructive_xor,
    build_encoder,
    build_parity_check,
    build_pbs_cnot,
    classify_outcomes,
    derive_correction_table,
    truth_table,
)
from .circuit import elaborate, format_circuit, parse_circuit, run_circuit, three_qubit_parity_circuit

__version__ = "0.1.0"
