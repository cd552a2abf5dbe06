"""Imperfect photon sources.

An attenuated laser gives Poisson photon numbers, so some pulses are
empty and some carry two or more photons. Feeding such pulses into a
post-selected gate produces errors. A heralded source instead detects
one photon of a down-converted pair and parks its twin in a switched
storage loop until it is needed; switch and loop losses set how often a
photon is actually delivered.

Run: python demos/photon_sources.py
"""

from loqc.gates import get_gate
from loqc.sources import (
    AttenuatedLaser,
    HeraldedLoop,
    analytic_delivery,
    gate_error_with_sources,
    photon_number_distribution,
    request_windows,
    simulate_heralded_source,
)

laser = AttenuatedLaser(1.0)
print("Attenuated laser, mean one photon per pulse")
for n in range(5):
    print(f"  P({n}) = {photon_number_distribution(laser, n):.6f}")

print("\nParity check with its first input from an attenuated laser")
gate = get_gate("parity_check")
for mu in (0.05, 0.1, 0.2, 0.4):
    r = gate_error_with_sources(gate, {0: AttenuatedLaser(mu)})
    print(f"  mu = {mu:4.2f}: coincidence probability {r.coincidence_probability:.4f}, "
          f"error rate {r.error_rate:.4f}")

loop = HeraldedLoop(p=0.05, eta_switch=0.9, eta_loop=0.95)
requests = [4, 9, 14, 19, 24]
stats = simulate_heralded_source(loop, requests, seed=7, trials=100_000)
print("\nHeralded storage loop, p = 0.05, switch 0.9, loop 0.95 per pass")
print("  request   Monte Carlo         analytic")
for i, (r, window) in enumerate(zip(requests, request_windows(loop, requests))):
    print(f"  {r:7d}   {stats.p_one[i]:.4f} +- {stats.stderr_one[i]:.4f}   "
          f"{analytic_delivery(loop, window):.4f}")
