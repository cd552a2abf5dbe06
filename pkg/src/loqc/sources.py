"""Photon-source statistics and their effect on gate errors.

Three sources: a phase-randomized attenuated laser (Poisson photon
number), an SPDC pair source, and a heralded source that parks the twin
of a detected pair photon in a switched storage loop until requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Mapping, Sequence

import numpy as np

from .fock import FockState, QubitSlot, tensor, vacuum
from .gates import (
    GateDefinition,
    _logical_split,
    basis_input,
    bits,
    detect_and_correct,
    prepare,
    propagate,
)

BLOCK_SIZE = 10_000


@dataclass(frozen=True)
class AttenuatedLaser:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mean photon number must be positive, got {self.mu}")


@dataclass(frozen=True)
class SPDCPair:
    p: float
    include_double_pairs: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"pair probability {self.p} outside [0, 1]")
        if self.include_double_pairs and self.p + self.p ** 2 > 1.0:
            raise ValueError("p + p^2 exceeds 1; double-pair model invalid")


@dataclass(frozen=True)
class HeraldedLoop:
    """Heralded storage-loop source driven by a pulse train.

    ``max_cycles`` bounds how long a photon may sit in the loop: the
    switch is armed only during the ``max_cycles + 1`` pulses that end at
    each request.
    """

    p: float
    eta_switch: float
    eta_loop: float
    pulse_period: float = 1e-8
    max_cycles: int = 10

    def __post_init__(self):
        for name in ("p", "eta_switch", "eta_loop"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} = {getattr(self, name)} outside [0, 1]")
        if self.pulse_period <= 0:
            raise ValueError("pulse period must be positive")
        if self.max_cycles < 0:
            raise ValueError("max_cycles must be non-negative")


SourceModel = AttenuatedLaser | SPDCPair | HeraldedLoop


@dataclass
class DeliveryStats:
    """Per-request Monte Carlo estimates for a heralded source."""

    requests: list[int]
    p_one: list[float]
    p_vacuum: list[float]
    p_multi: list[float]
    mean_cycles: list[float]
    stderr_one: list[float]
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def photon_number_distribution(model: SourceModel, n: int) -> float:
    """Probability of ``n`` photons (pairs, for SPDC) per pulse or request."""
    if n < 0:
        raise ValueError("photon number must be non-negative")
    if isinstance(model, AttenuatedLaser):
        return math.exp(-model.mu + n * math.log(model.mu) - math.lgamma(n + 1))
    if isinstance(model, SPDCPair):
        p = model.p
        if model.include_double_pairs:
            return {0: 1.0 - p - p * p, 1: p, 2: p * p}.get(n, 0.0)
        return {0: 1.0 - p, 1: p}.get(n, 0.0)
    if isinstance(model, HeraldedLoop):
        one = analytic_delivery(model, model.max_cycles + 1)
        return {0: 1.0 - one, 1: one}.get(n, 0.0)
    raise TypeError(f"unknown source model {model!r}")


def heralded_delivery_probability(model: HeraldedLoop, cycles_stored: int) -> float:
    """Survival of a stored photon: switch in, ``k`` loop passes, switch out."""
    if not 0 <= cycles_stored <= model.max_cycles:
        raise ValueError(f"cycles_stored {cycles_stored} outside [0, {model.max_cycles}]")
    return model.eta_switch ** 2 * model.eta_loop ** cycles_stored


def request_windows(model: HeraldedLoop, schedule: Sequence[int]) -> list[int]:
    """Number of armed pulses before each request, request pulse included."""
    if not schedule:
        raise ValueError("request schedule is empty")
    windows, prev = [], -1
    for r in schedule:
        if r <= prev:
            raise ValueError("request schedule must be strictly increasing")
        windows.append(min(r - prev, model.max_cycles + 1))
        prev = r
    return windows


def analytic_delivery(model: HeraldedLoop, window: int) -> float:
    """P(one photon delivered) when the switch is armed for ``window`` pulses.

    The first pair emitted in the window, after ``j`` empty pulses, waits
    ``window - 1 - j`` cycles in the loop.
    """
    return sum(
        (1 - model.p) ** j * model.p * heralded_delivery_probability(model, window - 1 - j)
        for j in range(window)
    )


def analytic_mean_cycles(model: HeraldedLoop, window: int) -> float:
    """Mean storage time of a heralded photon, given that one was heralded."""
    w = [(1 - model.p) ** j * model.p for j in range(window)]
    if sum(w) == 0:
        return 0.0
    return sum(wj * (window - 1 - j) for j, wj in enumerate(w)) / sum(w)


def _survives_loop(rng: np.random.Generator, cycles: np.ndarray, eta: float) -> np.ndarray:
    if eta >= 1.0:
        return np.ones(cycles.shape, dtype=bool)
    if eta <= 0.0:
        return cycles == 0
    # passes survived before the first loss
    passes = rng.geometric(1.0 - eta, size=cycles.shape) - 1
    return passes >= cycles


def simulate_heralded_source(model: HeraldedLoop, request_schedule: Sequence[int],
                             seed: int, trials: int) -> DeliveryStats:
    """Monte Carlo over pulse trains; one independent random stream per block of trials."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    windows = request_windows(model, request_schedule)
    n_req = len(windows)
    one = np.zeros(n_req)
    cycles_sum = np.zeros(n_req)
    heralded = np.zeros(n_req)
    n_blocks = -(-trials // BLOCK_SIZE)
    streams = np.random.SeedSequence(seed).spawn(n_blocks)
    for b, ss in enumerate(streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        size = min(BLOCK_SIZE, trials - b * BLOCK_SIZE)
        for r, window in enumerate(windows):
            emitted = rng.random((size, window)) < model.p
            got = emitted.any(axis=1)
            first = np.argmax(emitted, axis=1)
            cycles = window - 1 - first
            ok = got.copy()
            ok &= rng.random(size) < model.eta_switch
            ok &= _survives_loop(rng, cycles, model.eta_loop)
            ok &= rng.random(size) < model.eta_switch
            one[r] += ok.sum()
            heralded[r] += got.sum()
            cycles_sum[r] += cycles[got].sum()
    p_one = one / trials
    return DeliveryStats(
        requests=[int(r) for r in request_schedule],
        p_one=p_one.tolist(),
        p_vacuum=(1.0 - p_one).tolist(),
        p_multi=[0.0] * n_req,
        mean_cycles=[float(c / h) if h else 0.0 for c, h in zip(cycles_sum, heralded)],
        stderr_one=np.sqrt(p_one * (1 - p_one) / trials).tolist(),
        trials=trials,
        seed=seed,
    )


def _multiphoton_qubit(alpha: complex, beta: complex, n: int) -> FockState:
    """n photons sharing one polarization mode (alpha H + beta V) on a slot."""
    norm = math.hypot(abs(alpha), abs(beta))
    alpha, beta = alpha / norm, beta / norm
    amps = {}
    for k in range(n + 1):
        coeff = math.comb(n, k) * alpha ** (n - k) * beta ** k
        coeff *= math.sqrt(math.factorial(n - k) * math.factorial(k) / math.factorial(n))
        amps[(n - k, k)] = coeff
    return FockState(2, amps)


@dataclass
class SourceErrorReport:
    acceptance_probability: float
    coincidence_probability: float
    error_rate: float
    captured_weight: float

    def to_dict(self) -> dict:
        return asdict(self)


def gate_error_with_sources(gate: GateDefinition, assignment: Mapping[int, SourceModel],
                            truncation: int = 3) -> SourceErrorReport:
    """Gate acceptance and error when some inputs come from imperfect sources.

    Each assigned input slot receives an incoherent mixture of n-photon
    states, all n photons carrying the slot's logical polarization, with
    n < ``truncation + 1``. Errors are judged in the coincidence basis: a
    run counts only if the gate accepts and every output slot holds at
    least one photon, and it is correct only if every output slot holds
    exactly one photon with the ideal logical value. Results are averaged
    over the logical basis inputs that the ideal gate maps to a nonzero
    output.
    """
    if truncation < 2:
        raise ValueError("truncation must be at least 2 to include multi-photon terms")
    cap = max(8, gate.n_inputs * truncation + 4)
    for slot in assignment:
        if not 0 <= slot < gate.n_inputs:
            raise ValueError(f"input slot {slot} not in gate {gate.name}")
    slots = sorted(assignment)
    dists = {s: [photon_number_distribution(assignment[s], n) for n in range(truncation + 1)]
             for s in slots}
    captured = math.prod(sum(d) for d in dists.values()) if dists else 1.0
    n_out = len(gate.output_slots)

    accs, coinc, errs = [], [], []
    for i in range(2 ** gate.n_inputs):
        col = np.abs(gate.ideal[:, i]) ** 2
        if col.sum() == 0:
            continue
        want = {bits(j, n_out) for j in np.flatnonzero(col)}
        value = bits(i, gate.n_inputs)
        raw_w = acc_w = good_w = total_w = 0.0
        for counts in np.ndindex(*[truncation + 1] * len(slots)):
            weight = math.prod(dists[s][n] for s, n in zip(slots, counts))
            if weight == 0.0:
                continue
            photons = dict(zip(slots, counts))
            state = vacuum(0, photon_cap=cap)
            for k, bit in enumerate(value):
                ab = (0, 1) if bit == "1" else (1, 0)
                state = tensor(state, _multiphoton_qubit(*ab, photons.get(k, 1)))
            branches = detect_and_correct(gate, propagate(gate, prepare(gate, state)))
            total_w += weight
            for branch in branches.values():
                raw_w += branch.norm_squared() * weight
                for (val, rest), a in _logical_split(branch, gate.output_slots).items():
                    p = abs(a) ** 2 * weight
                    if val is None:
                        if _all_outputs_lit(branch, rest, gate.output_slots):
                            acc_w += p
                        continue
                    acc_w += p
                    if bits(val, n_out) in want:
                        good_w += p
        accs.append(raw_w / total_w)
        coinc.append(acc_w / total_w)
        errs.append(1.0 - good_w / acc_w if acc_w else 0.0)
    return SourceErrorReport(float(np.mean(accs)), float(np.mean(coinc)),
                             float(np.mean(errs)), captured)


def _all_outputs_lit(state: FockState, occupation, slots: Sequence[QubitSlot]) -> bool:
    return all(occupation[s.h_mode] + occupation[s.v_mode] >= 1 for s in slots)
