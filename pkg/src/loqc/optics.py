"""Linear optical elements and Fock-state evolution through them.

Every element reduces to a unitary acting on mode creation operators.
Column ``j`` of a unitary is the image of input mode ``j``:
``a_j^dag -> sum_i U[i, j] a_i^dag``. Multi-photon amplitudes follow from
matrix permanents.

Conventions
-----------
Beam splitter of reflectivity ``r``: ``[[t, s], [s, -t]]`` with
``t = sqrt(1 - r)``, ``s = sqrt(r)``. Two photons meeting on a 50:50
splitter leave as ``(|2,0> - |0,2>)/sqrt(2)``.

Polarizing beam splitter on ports ``a = (aH, aV)`` and ``b = (bH, bV)``:
H rails pass straight through, V rails swap ports, no phases.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .fock import FockState, QubitSlot, PRUNE_TOL

UNITARY_TOL = 1e-12

BEAM_SPLITTER = "beam_splitter"
POLARIZING_BEAM_SPLITTER = "polarizing_beam_splitter"
POLARIZATION_ROTATOR = "polarization_rotator"
PHASE_SHIFTER = "phase_shifter"
LOSS_CHANNEL = "loss_channel"

# Target-mode count per element kind. Loss lists only the lossy mode; the
# environment mode is allocated when the element is applied.
ELEMENT_ARITY = {
    BEAM_SPLITTER: 2,
    POLARIZING_BEAM_SPLITTER: 4,
    POLARIZATION_ROTATOR: 2,
    PHASE_SHIFTER: 1,
    LOSS_CHANNEL: 1,
}


def permanent(m) -> complex:
    """Permanent of a square matrix by Ryser's formula in Gray-code order.

    O(2^n n). Reentrant: no state outside the call frame.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])

    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        diff = gray ^ prev
        j = diff.bit_length() - 1
        if gray & diff:
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        prev = gray
        term = np.prod(row_sums)
        total += -term if bin(gray).count("1") & 1 else term
    return complex(total if n % 2 == 0 else -total)


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """Unitary on ``dimension`` optical modes; unitarity is checked on construction."""

    entries: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        u = np.array(self.entries, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {u.shape}")
        if self.check:
            err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) if u.size else 0.0
            if err > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (max deviation {err:.3g})")
        u.setflags(write=False)
        object.__setattr__(self, "entries", u)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.entries.conj().T)

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        return ModeUnitary(self.entries @ other.entries)


@dataclass(frozen=True)
class ElementSpec:
    """A linear optical element and the modes it acts on.

    ``param`` is the reflectivity (beam splitter), rotation angle in radians
    (rotator), phase in radians (phase shifter) or transmission (loss).
    Rotator targets are an (H, V) pair; PBS targets are ``(aH, aV, bH, bV)``.
    """

    kind: str
    targets: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in ELEMENT_ARITY:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if len(self.targets) != ELEMENT_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} acts on {ELEMENT_ARITY[self.kind]} modes, got {len(self.targets)}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate target modes {self.targets}")
        if self.kind != POLARIZING_BEAM_SPLITTER and self.param is None:
            raise ValueError(f"{self.kind} needs a parameter")
        if self.kind in (BEAM_SPLITTER, LOSS_CHANNEL) and not 0.0 <= self.param <= 1.0:
            raise ValueError(f"{self.kind} parameter {self.param} outside [0, 1]")
        if self.param is not None and not math.isfinite(self.param):
            raise ValueError("element parameter must be finite")


def beam_splitter(r: float, a: int, b: int) -> ElementSpec:
    return ElementSpec(BEAM_SPLITTER, (a, b), r)


def pbs(port_a: QubitSlot, port_b: QubitSlot) -> ElementSpec:
    return ElementSpec(POLARIZING_BEAM_SPLITTER, port_a.modes + port_b.modes)


def rotator(theta: float, slot: QubitSlot) -> ElementSpec:
    return ElementSpec(POLARIZATION_ROTATOR, slot.modes, theta)


def phase_shifter(phi: float, mode: int) -> ElementSpec:
    return ElementSpec(PHASE_SHIFTER, (mode,), phi)


def loss_channel(eta: float, mode: int) -> ElementSpec:
    return ElementSpec(LOSS_CHANNEL, (mode,), eta)


def element_unitary(spec: ElementSpec) -> ModeUnitary:
    kind, p = spec.kind, spec.param
    if kind == BEAM_SPLITTER:
        t, s = math.sqrt(1.0 - p), math.sqrt(p)
        return ModeUnitary([[t, s], [s, -t]])
    if kind == PHASE_SHIFTER:
        return ModeUnitary([[np.exp(1j * p)]])
    if kind == POLARIZATION_ROTATOR:
        c, s = math.cos(p), math.sin(p)
        return ModeUnitary([[c, -s], [s, c]])
    if kind == POLARIZING_BEAM_SPLITTER:
        u = np.zeros((4, 4))
        u[0, 0] = u[2, 2] = 1.0
        u[3, 1] = u[1, 3] = 1.0
        return ModeUnitary(u)
    if kind == LOSS_CHANNEL:
        t, s = math.sqrt(p), math.sqrt(1.0 - p)
        return ModeUnitary([[t, -s], [s, t]])
    raise ValueError(f"unknown element kind {kind!r}")


def embed(u: ModeUnitary, placement, total_modes: int) -> ModeUnitary:
    placement = [int(p) for p in placement]
    if len(placement) != u.dimension:
        raise ValueError("placement length must equal the unitary dimension")
    if len(set(placement)) != len(placement):
        raise ValueError(f"placement indices collide: {placement}")
    if any(p < 0 or p >= total_modes for p in placement):
        raise ValueError(f"placement {placement} out of range for {total_modes} modes")
    full = np.eye(total_modes, dtype=complex)
    full[np.ix_(placement, placement)] = u.entries
    return ModeUnitary(full, check=False)


def _local_outputs(u: np.ndarray, n_in: tuple[int, ...]) -> list[tuple[tuple[int, ...], complex]]:
    cols = [j for j, c in enumerate(n_in) for _ in range(c)]
    if not cols:
        return [(n_in, 1.0 + 0j)]
    occupied = sorted(set(cols))
    reachable = [i for i in range(u.shape[0]) if np.any(np.abs(u[i, occupied]) > 0)]
    in_norm = math.prod(math.factorial(c) for c in n_in)
    out = []
    for rows in itertools.combinations_with_replacement(reachable, len(cols)):
        m_out = [0] * u.shape[0]
        for i in rows:
            m_out[i] += 1
        out_norm = math.prod(math.factorial(c) for c in m_out)
        amp = permanent(u[np.ix_(rows, cols)]) / math.sqrt(in_norm * out_norm)
        if abs(amp) >= PRUNE_TOL:
            out.append((tuple(m_out), amp))
    return out


def _transform(state: FockState, u: np.ndarray, placement: list[int]) -> FockState:
    cache: dict[tuple[int, ...], list] = {}
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        n_in = tuple(occ[p] for p in placement)
        outputs = cache.get(n_in)
        if outputs is None:
            outputs = cache[n_in] = _local_outputs(u, n_in)
        new = list(occ)
        for m_out, c in outputs:
            for p, x in zip(placement, m_out):
                new[p] = x
            out[tuple(new)] += amp * c
    return state.with_amplitudes(out)


def apply_unitary(state: FockState, u: ModeUnitary, placement) -> FockState:
    """Apply ``u`` to the base modes ``placement`` in every temporal bin."""
    placement = [int(p) for p in placement]
    if len(placement) != u.dimension:
        raise ValueError("placement length must equal the unitary dimension")
    if any(p < 0 or p >= state.modes_per_bin for p in placement):
        raise ValueError(f"placement {placement} out of range")
    for b in range(state.bins):
        shift = b * state.modes_per_bin
        state = _transform(state, u.entries, [p + shift for p in placement])
    return state


def evolve(state: FockState, u: ModeUnitary) -> FockState:
    """Evolve through ``u``, which spans every base mode of ``state``.

    Output amplitude for occupation m from input n is
    perm(U[m, n]) / sqrt(prod m_i! prod n_j!), with rows and columns
    repeated by occupation. Modes that ``u`` leaves untouched are skipped.
    """
    if u.dimension != state.modes_per_bin:
        raise ValueError(
            f"unitary dimension {u.dimension} does not match {state.modes_per_bin} modes"
        )
    e = u.entries
    eye = np.eye(u.dimension)
    active = [i for i in range(u.dimension)
              if np.any(e[i, :] != eye[i, :]) or np.any(e[:, i] != eye[:, i])]
    if not active:
        return state
    local = ModeUnitary(e[np.ix_(active, active)], check=False)
    return apply_unitary(state, local, active)


def apply_element(state: FockState, spec: ElementSpec) -> FockState:
    """Apply one element; a loss channel appends a fresh vacuum environment mode."""
    u = element_unitary(spec)
    if spec.kind != LOSS_CHANNEL:
        return apply_unitary(state, u, spec.targets)
    if state.bins > 1:
        raise ValueError("loss channels are not supported on multi-bin states")
    grown = FockState(state.mode_count + 1,
                      {k + (0,): a for k, a in state.amplitudes.items()},
                      state.photon_cap)
    return apply_unitary(grown, u, [spec.targets[0], state.mode_count])


def compose(*unitaries: ModeUnitary) -> ModeUnitary:
    """Product applying ``unitaries`` left to right in time order."""
    return reduce(lambda acc, u: u @ acc, unitaries)


def make_distinguishable(state: FockState, qubit_slot: QubitSlot, overlap: float) -> FockState:
    """Give the slot's photon a squared overlap ``overlap`` with the shared temporal mode.

    The remainder of the photon moves to a new temporal bin appended to the
    state, so later elements act on it with the same optics but it no longer
    interferes with photons in the original bin.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap {overlap} outside [0, 1]")
    h, v = qubit_slot.modes
    mpb = state.modes_per_bin
    if max(h, v) >= mpb:
        raise ValueError(f"slot {qubit_slot} out of range")
    for occ in state.amplitudes:
        if occ[h] + occ[v] != 1:
            raise ValueError(f"slot {qubit_slot} does not hold exactly one photon in {occ}")
    if overlap == 1.0:
        return state
    keep, move = math.sqrt(overlap), math.sqrt(1.0 - overlap)
    new_bin = state.mode_count
    amps: dict[tuple[int, ...], complex] = defaultdict(complex)
    pad = (0,) * mpb
    for occ, amp in state.amplitudes.items():
        rail = h if occ[h] else v
        amps[occ + pad] += keep * amp
        moved = list(occ + pad)
        moved[rail] -= 1
        moved[new_bin + rail] += 1
        amps[tuple(moved)] += move * amp
    return FockState(state.mode_count + mpb, amps, state.photon_cap, mpb)


def random_unitary(n: int, rng: np.random.Generator) -> ModeUnitary:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return ModeUnitary(q * (d / np.abs(d)))
