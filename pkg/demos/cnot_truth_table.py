"""The polarizing-beam-splitter CNOT and what imperfect photons do to it.

The gate combines the control and target with an entangled ancilla pair
on two polarizing beam splitters. Two detectors must each see exactly
one photon, which happens a quarter of the time. Every one of the four
accepted detector outcomes gives the CNOT once the matching Pauli
correction is applied; the correction table is found by search.

Run: python demos/cnot_truth_table.py
"""

import math

from loqc.fock import logical_distribution
from loqc.gates import build_pbs_cnot, classify_outcomes, product_input, simulate, truth_table

gate = build_pbs_cnot()

print("Corrections per accepted detector pattern")
for pattern, fixes in gate.corrections.items():
    ops = ", ".join(f"{c.op} on modes {c.target.modes}" for c in fixes) or "none"
    print(f"  counts {pattern.counts}: {ops}")

print("\nTruth table (conditional probability, acceptance)")
report = truth_table(gate)
for inp, row in report.truth_table.items():
    cells = ", ".join(f"{out}: {p:.3f}" for out, p in row.items())
    print(f"  {inp} -> {cells}   P_accept = {report.acceptance[inp]:.4f}")

print("\nOutcome classes for input 10")
for cls, p in sorted(classify_outcomes(gate, product_input([(0, 1), (1, 0)])).items(),
                     key=lambda kv: -kv[1]):
    print(f"  {cls.tag:12s} {p:.4f}  {[c.op for c in cls.corrections]}")

# A control in superposition and a target of 0 come out entangled.
s = 1 / math.sqrt(2)
out = simulate(gate, product_input([(s, s), (1, 0)])).output()
weights = logical_distribution(out, list(gate.output_slots))
print("\nControl |+>, target |0> gives logical weights",
      {k: round(v / out.norm_squared(), 6) for k, v in sorted(weights.items())})

print("\nTruth-table fidelity when the control photon is partly distinguishable")
for v in (1.0, 0.75, 0.5, 0.25, 0.0):
    print(f"  overlap {v:4.2f}: {truth_table(gate, v).truth_table_fidelity:.4f}")
