"""Parity of three qubits from two XOR gates wired in series.

The first XOR combines q0 and q1; its output travels on to a second XOR
together with q2. Each gate succeeds half the time, so the whole circuit
succeeds a quarter of the time, and when it does the surviving photon
carries the parity of the three inputs. A superposition on the first
input passes through coherently, which shows up as a definite result in
the diagonal basis.

Run: python demos/parity_circuit.py
"""

import itertools
import math

from loqc.circuit import (
    bundled_circuit_text,
    elaborate,
    format_circuit,
    parse_circuit,
    run_circuit,
    three_qubit_parity_circuit,
)

print("Bundled circuit file:")
print(bundled_circuit_text())
print("Printed back from the parsed AST:")
print(format_circuit(parse_circuit(bundled_circuit_text())))

print("inputs  parity  P(parity | accept)  acceptance")
for bits in itertools.product("01", repeat=3):
    value = "".join(bits)
    report = run_circuit(elaborate(three_qubit_parity_circuit(value)))
    parity = str(sum(map(int, value)) % 2)
    print(f"  {value}     {parity}         {report.outputs.get(parity, 0.0):.6f}"
          f"          {report.acceptance_probability:.4f}")

s = 1 / math.sqrt(2)
for basis in ("hv", "diag"):
    report = run_circuit(elaborate(three_qubit_parity_circuit([(s, s), 0, 0], basis=basis)))
    print(f"\nq0 = |+>, q1 = q2 = |0>, measured in {basis}: {report.outputs}")
