"""Photon-number-conserving optical elements and circuit folding.

Conventions fixed here and relied on by every other module:

* PBS: horizontal polarization transmits (stays in its arm), vertical
  reflects (crosses arms), with no reflection phase.
* HWP at angle theta acts on one port as the real Jones matrix
  ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]``; theta = pi/8 is the
  diagonal-basis rotation, theta = pi/4 swaps H and V.
* A beam-displacer merge relabels both input ports onto one output port,
  polarization preserved.  It is legal only where that relabeling stays
  injective on the occupied modes of every ket; a violation raises
  ``BDCollision`` because the compiler must never build such a circuit.

Elements are applied in second quantization: each creation operator is
substituted by its image and the product re-expanded, so bosonic
``sqrt(n!)`` factors for multiply-occupied modes come out exactly (this is
what makes two photons bunching on one port interfere correctly).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from . import states
from .errors import BDCollision, PortCollision
from .states import FockTerm, Mode, PhotonicState, eps


@dataclass(frozen=True)
class PBS:
    port_a: int
    port_b: int


@dataclass(frozen=True)
class HWP:
    port: int
    theta: float


@dataclass(frozen=True)
class Phase:
    port: int
    phi: float


@dataclass(frozen=True)
class BDMerge:
    port_even: int
    port_odd: int
    port_out: int


@dataclass(frozen=True)
class BDSplit:
    port_in: int
    port_even: int
    port_odd: int


@dataclass(frozen=True)
class Inject:
    """Tensor a fixed source state into the pipeline (disjoint ports)."""

    state: PhotonicState


Element = PBS | HWP | Phase | BDMerge | BDSplit


def _accumulate(acc: dict[FockTerm, complex], term: FockTerm, amp: complex) -> None:
    acc[term] = acc.get(term, 0j) + amp


def _relabel(
    state: PhotonicState,
    mapping: dict[Mode, Mode],
    collision_error: type[Exception],
    what: str,
) -> PhotonicState:
    """Apply a mode relabeling; error out if two occupied modes collide."""
    out: dict[FockTerm, complex] = {}
    for term, amp in state.terms.items():
        occ: dict[Mode, int] = {}
        for m, count in term:
            target = mapping.get(m, m)
            if target in occ:
                raise collision_error(
                    f"{what}: modes collide on {target} in term {term}"
                )
            occ[target] = count
        _accumulate(out, tuple(sorted(occ.items())), amp)
    return PhotonicState(out, state.branch_prob)


def _apply_mode_linear_map(
    state: PhotonicState, images: dict[Mode, tuple[tuple[Mode, complex], ...]]
) -> PhotonicState:
    """Substitute creation operators by linear images, with exact bosonic factors."""
    out: dict[FockTerm, complex] = {}
    for term, amp in state.terms.items():
        touched = [(m, c) for m, c in term if m in images]
        if not touched:
            _accumulate(out, term, amp)
            continue
        rest = [(m, c) for m, c in term if m not in images]
        coeff0 = amp
        for _, c in term:
            coeff0 /= math.sqrt(math.factorial(c))
        # expand the product of touched creation operators photon by photon
        monomials: dict[tuple[Mode, ...], complex] = {(): coeff0}
        for m, c in touched:
            for _ in range(c):
                nxt: dict[tuple[Mode, ...], complex] = {}
                for key, co in monomials.items():
                    for m2, u in images[m]:
                        if u == 0:
                            continue
                        k2 = tuple(sorted(key + (m2,)))
                        nxt[k2] = nxt.get(k2, 0j) + co * u
                monomials = nxt
        for key, co in monomials.items():
            occ: dict[Mode, int] = {}
            for m2, c2 in rest:
                occ[m2] = c2
            for m2 in key:
                occ[m2] = occ.get(m2, 0) + 1
            factor = 1.0
            for c2 in occ.values():
                factor *= math.factorial(c2)
            _accumulate(out, tuple(sorted(occ.items())), co * math.sqrt(factor))
    tol = eps()
    return PhotonicState(
        {t: a for t, a in out.items() if abs(a) >= tol}, state.branch_prob
    )


def apply_pbs(state: PhotonicState, port_a: int, port_b: int) -> PhotonicState:
    """H transmits, V swaps arms; a pure mode permutation, so norm-preserving."""
    if port_a == port_b:
        raise PortCollision("PBS needs two distinct ports")
    mapping = {
        (port_a, states.V): (port_b, states.V),
        (port_b, states.V): (port_a, states.V),
    }
    return _relabel(state, mapping, PortCollision, "pbs")


def apply_hwp(state: PhotonicState, port: int, theta: float) -> PhotonicState:
    c = math.cos(2.0 * theta)
    s = math.sin(2.0 * theta)
    h, v = (port, states.H), (port, states.V)
    images = {
        h: ((h, complex(c)), (v, complex(s))),
        v: ((h, complex(s)), (v, complex(-c))),
    }
    return _apply_mode_linear_map(state, images)


def apply_phase(state: PhotonicState, port: int, phi: float) -> PhotonicState:
    """Every photon in the port (either polarization) acquires exp(i*phi)."""
    out: dict[FockTerm, complex] = {}
    for term, amp in state.terms.items():
        k = states.photons_in_port(term, port)
        out[term] = amp * cmath.exp(1j * phi * k) if k else amp
    return PhotonicState(out, state.branch_prob)


def apply_bd_merge(
    state: PhotonicState, port_even: int, port_odd: int, port_out: int
) -> PhotonicState:
    if len({port_even, port_odd, port_out}) != 3:
        raise PortCollision("BD merge needs three distinct ports")
    mapping = {
        (port_even, states.H): (port_out, states.H),
        (port_even, states.V): (port_out, states.V),
        (port_odd, states.H): (port_out, states.H),
        (port_odd, states.V): (port_out, states.V),
    }
    return _relabel(state, mapping, BDCollision, "bd_merge")


def apply_bd_split(
    state: PhotonicState, port_in: int, port_even: int, port_odd: int
) -> PhotonicState:
    """Inverse of the merge: H goes to the even port, V to the odd port."""
    if len({port_in, port_even, port_odd}) != 3:
        raise PortCollision("BD split needs three distinct ports")
    for term in state.terms:
        for p in (port_even, port_odd):
            if states.photons_in_port(term, p):
                raise PortCollision(f"BD split destination port {p} is occupied")
    mapping = {
        (port_in, states.H): (port_even, states.H),
        (port_in, states.V): (port_odd, states.V),
    }
    return _relabel(state, mapping, PortCollision, "bd_split")


def apply_element(state: PhotonicState, element: Element) -> PhotonicState:
    if isinstance(element, PBS):
        return apply_pbs(state, element.port_a, element.port_b)
    if isinstance(element, HWP):
        return apply_hwp(state, element.port, element.theta)
    if isinstance(element, Phase):
        return apply_phase(state, element.port, element.phi)
    if isinstance(element, BDMerge):
        return apply_bd_merge(
            state, element.port_even, element.port_odd, element.port_out
        )
    if isinstance(element, BDSplit):
        return apply_bd_split(
            state, element.port_in, element.port_even, element.port_odd
        )
    raise TypeError(f"not an optical element: {element!r}")


@dataclass
class Circuit:
    """Ordered elements, injections and post-selection steps."""

    steps: list = field(default_factory=list)

    def validate(self) -> None:
        """Check the beam-displacer freshness rule: merge outputs unused upstream."""
        seen: set[int] = set()
        for step in self.steps:
            if isinstance(step, BDMerge) and step.port_out in seen:
                raise PortCollision(
                    f"BD merge output port {step.port_out} already used upstream"
                )
            seen |= _step_ports(step)


def _step_ports(step) -> set[int]:
    if isinstance(step, PBS):
        return {step.port_a, step.port_b}
    if isinstance(step, (HWP, Phase)):
        return {step.port}
    if isinstance(step, BDMerge):
        return {step.port_even, step.port_odd, step.port_out}
    if isinstance(step, BDSplit):
        return {step.port_in, step.port_even, step.port_odd}
    if isinstance(step, Inject):
        return step.state.ports()
    ports = getattr(step, "referenced_ports", None)
    return set(ports()) if callable(ports) else set()


def run_circuit(
    state: PhotonicState, circuit: Circuit | Sequence
) -> tuple[PhotonicState, list[float]]:
    """Fold steps in order; returns the final state and one probability per
    post-selection step, in encounter order."""
    steps = circuit.steps if isinstance(circuit, Circuit) else list(circuit)
    trace: list[float] = []
    for step in steps:
        if isinstance(step, Inject):
            state = states.tensor(state, step.state)
        elif isinstance(step, (PBS, HWP, Phase, BDMerge, BDSplit)):
            state = apply_element(state, step)
        else:
            state, p = step.postselect(state)
            trace.append(p)
            if state.is_empty:
                break
    return state, trace


def circuit_to_jsonable(circuit: Circuit | Sequence) -> list[dict]:
    from . import measurement  # postselection steps live there

    steps = circuit.steps if isinstance(circuit, Circuit) else list(circuit)
    out = []
    for step in steps:
        if isinstance(step, PBS):
            out.append({"elem": "pbs", "port_a": step.port_a, "port_b": step.port_b})
        elif isinstance(step, HWP):
            out.append({"elem": "hwp", "port": step.port, "theta": step.theta})
        elif isinstance(step, Phase):
            out.append({"elem": "phase", "port": step.port, "phi": step.phi})
        elif isinstance(step, BDMerge):
            out.append(
                {
                    "elem": "bd_merge",
                    "port_even": step.port_even,
                    "port_odd": step.port_odd,
                    "port_out": step.port_out,
                }
            )
        elif isinstance(step, BDSplit):
            out.append(
                {
                    "elem": "bd_split",
                    "port_in": step.port_in,
                    "port_even": step.port_even,
                    "port_odd": step.port_odd,
                }
            )
        elif isinstance(step, Inject):
            out.append({"elem": "inject", "state": states.state_to_jsonable(step.state)})
        elif isinstance(step, measurement.CoincidenceSelect):
            out.append(
                {
                    "elem": "postselect",
                    "kind": "coincidence",
                    "groups": [sorted(g) for g in step.pattern.groups],
                }
            )
        elif isinstance(step, measurement.PasPairSelect):
            out.append(
                {
                    "elem": "postselect",
                    "kind": "pas_pair",
                    "port_x": step.port_x,
                    "port_y": step.port_y,
                    "mode": step.mode,
                    "correction_port": step.correction_port,
                }
            )
        else:
            raise TypeError(f"cannot serialize circuit step {step!r}")
    return out


def circuit_from_jsonable(data: Sequence[dict]) -> Circuit:
    from . import measurement

    steps: list = []
    for entry in data:
        kind = entry["elem"]
        if kind == "pbs":
            steps.append(PBS(int(entry["port_a"]), int(entry["port_b"])))
        elif kind == "hwp":
            steps.append(HWP(int(entry["port"]), float(entry["theta"])))
        elif kind == "phase":
            steps.append(Phase(int(entry["port"]), float(entry["phi"])))
        elif kind == "bd_merge":
            steps.append(
                BDMerge(
                    int(entry["port_even"]),
                    int(entry["port_odd"]),
                    int(entry["port_out"]),
                )
            )
        elif kind == "bd_split":
            steps.append(
                BDSplit(
                    int(entry["port_in"]),
                    int(entry["port_even"]),
                    int(entry["port_odd"]),
                )
            )
        elif kind == "inject":
            steps.append(Inject(states.state_from_jsonable(entry["state"])))
        elif kind == "postselect" and entry["kind"] == "coincidence":
            steps.append(
                measurement.CoincidenceSelect(
                    measurement.CoincidencePattern(
                        tuple(tuple(int(p) for p in g) for g in entry["groups"])
                    )
                )
            )
        elif kind == "postselect" and entry["kind"] == "pas_pair":
            steps.append(
                measurement.PasPairSelect(
                    int(entry["port_x"]),
                    int(entry["port_y"]),
                    str(entry["mode"]),
                    int(entry["correction_port"]),
                )
            )
        else:
            raise ValueError(f"unknown circuit step {entry!r}")
    return Circuit(steps)
