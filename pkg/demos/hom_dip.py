"""Two-photon interference on a beam splitter.

Two single photons enter the two input ports of a 50:50 beam splitter.
When they are identical they always leave together (the Hong-Ou-Mandel
effect), so no coincidence between the two output detectors is ever
recorded. Making one photon partly distinguishable, with squared overlap
v, brings the coincidences back as (1 - v) / 2.

Run: python demos/hom_dip.py
"""

from loqc.fock import FockState, QubitSlot
from loqc.optics import beam_splitter, element_unitary, embed, evolve, make_distinguishable

# Photons sit on the H rails (modes 0 and 2) of two polarization slots.
PORT_A, PORT_B = QubitSlot(0, 1), QubitSlot(2, 3)
SPLITTER = embed(element_unitary(beam_splitter(0.5, 0, 1)), [PORT_A.h_mode, PORT_B.h_mode], 4)


def coincidence(overlap: float) -> float:
    state = FockState(4, {(1, 0, 1, 0): 1.0})
    state = make_distinguishable(state, PORT_B, overlap)
    out = evolve(state, SPLITTER)
    total = 0.0
    for occ, amp in out.amplitudes.items():
        left = sum(occ[m] for m in out.bin_modes(PORT_A.h_mode))
        right = sum(occ[m] for m in out.bin_modes(PORT_B.h_mode))
        if left == 1 and right == 1:
            total += abs(amp) ** 2
    return total


if __name__ == "__main__":
    identical = evolve(FockState(4, {(1, 0, 1, 0): 1.0}), SPLITTER)
    print("identical photons leave as", identical)
    print()
    print(" overlap v   coincidence   (1 - v)/2")
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        print(f"   {v:4.2f}      {coincidence(v):.6f}     {(1 - v) / 2:.6f}")
