"""Coincidence post-selection, projective measurements and outcome bookkeeping.

Post-selection keeps amplitudes untouched: the returned state is the kept
sub-state with ``branch_prob`` multiplied by the kept-fraction probability,
so a zero-probability pattern yields an empty state rather than an error.
Projective measurements return complete outcome distributions whose
probabilities sum to one and whose post-states are normalized.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import elements, states
from .errors import BranchMismatch, MissingCorrection, NotSingleOccupancy
from .states import FockTerm, PhotonicState, eps


@dataclass(frozen=True)
class CoincidencePattern:
    """Disjoint port groups, each required to hold exactly one photon."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise ValueError("coincidence pattern needs at least one group")
        seen: set[int] = set()
        for group in self.groups:
            if not group:
                raise ValueError("empty coincidence group")
            overlap = seen & set(group)
            if overlap:
                raise ValueError(f"coincidence groups overlap on ports {sorted(overlap)}")
            seen |= set(group)


def _photons_in_group(term: FockTerm, group: tuple[int, ...]) -> int:
    members = set(group)
    return sum(count for (port, _), count in term if port in members)


def postselect_coincidence(
    state: PhotonicState, pattern: CoincidencePattern
) -> tuple[PhotonicState, float]:
    """Keep kets with exactly one photon per group; probability is the kept
    fraction of the squared norm.  Zero survivors give (empty state, 0.0)."""
    total = state.norm_sq()
    if total <= 0.0:
        return PhotonicState({}, 0.0), 0.0
    kept = {
        term: amp
        for term, amp in state.terms.items()
        if all(_photons_in_group(term, g) == 1 for g in pattern.groups)
    }
    kept_nsq = sum(abs(a) ** 2 for a in kept.values())
    prob = kept_nsq / total
    return PhotonicState(kept, state.branch_prob * prob), prob


@dataclass(frozen=True)
class Outcome:
    label: str
    prob: float
    state: PhotonicState  # normalized post-measurement state; empty if prob 0


@dataclass(frozen=True)
class OutcomeDistribution:
    outcomes: tuple[Outcome, ...]

    def prob(self, label: str) -> float:
        for o in self.outcomes:
            if o.label == label:
                return o.prob
        raise KeyError(label)

    def state(self, label: str) -> PhotonicState:
        for o in self.outcomes:
            if o.label == label:
                return o.state
        raise KeyError(label)

    def total(self) -> float:
        return sum(o.prob for o in self.outcomes)


def distribution_to_jsonable(dist: OutcomeDistribution) -> list[dict]:
    return [
        {
            "outcome": o.label,
            "prob": o.prob,
            "state": states.state_to_jsonable(o.state),
        }
        for o in dist.outcomes
    ]


def _single_photon_mode(term: FockTerm, port: int) -> tuple[int, str]:
    found = [(m, c) for m, c in term if m[0] == port]
    if len(found) != 1 or found[0][1] != 1:
        raise NotSingleOccupancy(f"port {port} does not hold exactly one photon")
    return found[0][0]


def project_polarization_pair(
    state: PhotonicState, port_x: int, port_y: int
) -> OutcomeDistribution:
    """Joint H/V projection of the two single photons at port_x and port_y."""
    total = state.norm_sq()
    buckets: dict[str, dict[FockTerm, complex]] = {
        "HH": {}, "HV": {}, "VH": {}, "VV": {}
    }
    for term, amp in state.terms.items():
        (_, px) = _single_photon_mode(term, port_x)
        (_, py) = _single_photon_mode(term, port_y)
        reduced = tuple(m for m in term if m[0][0] not in (port_x, port_y))
        rest = buckets[px + py]
        rest[reduced] = rest.get(reduced, 0j) + amp
    outcomes = []
    for label in ("HH", "HV", "VH", "VV"):
        sub = PhotonicState(buckets[label], 1.0)
        nsq = sub.norm_sq()
        prob = nsq / total if total > 0 else 0.0
        if nsq > eps() ** 2:
            post = states.scaled(
                sub, 1.0 / math.sqrt(nsq), branch_prob=state.branch_prob * prob
            )
        else:
            post = PhotonicState({}, 0.0)
        outcomes.append(Outcome(label, prob, post))
    return OutcomeDistribution(tuple(outcomes))


def fourier_measure_path(
    state: PhotonicState, port_group: Sequence[int], d: int | None = None
) -> OutcomeDistribution:
    """Project the single photon spread over ``port_group`` onto the Fourier
    basis of its path qudit.

    Outcome k uses the bra (1/sqrt(d)) * sum_j exp(+2*pi*i*j*k/d) <j|, matching
    phase factors exp(2*pi*i*k/d) between adjacent surviving branches; the
    conjugate phases undo them (see ``feedforward``).
    """
    ports = list(port_group)
    if d is None:
        d = len(ports)
    if d != len(ports):
        raise ValueError("dimension does not match the measured port group")
    total = state.norm_sq()
    pol_seen: set[str] = set()
    located: list[tuple[FockTerm, complex, int]] = []
    for term, amp in state.terms.items():
        inside = [(m, c) for m, c in term if m[0] in set(ports)]
        if len(inside) != 1 or inside[0][1] != 1:
            raise NotSingleOccupancy(
                "measured port group must hold exactly one photon per ket"
            )
        (port, pol), _ = inside[0]
        pol_seen.add(pol)
        reduced = tuple(m for m in term if m[0][0] != port)
        located.append((reduced, amp, ports.index(port)))
    if len(pol_seen) > 1:
        raise NotSingleOccupancy("measured photon polarization is not uniform")
    outcomes = []
    root = 1.0 / math.sqrt(d)
    for k in range(d):
        acc: dict[FockTerm, complex] = {}
        for reduced, amp, j in located:
            phase = cmath.exp(2j * math.pi * j * k / d)
            acc[reduced] = acc.get(reduced, 0j) + amp * phase * root
        sub = PhotonicState(acc, 1.0)
        nsq = sub.norm_sq()
        prob = nsq / total if total > 0 else 0.0
        if nsq > eps() ** 2:
            post = states.scaled(
                sub, 1.0 / math.sqrt(nsq), branch_prob=state.branch_prob * prob
            )
        else:
            post = PhotonicState({}, 0.0)
        outcomes.append(Outcome(str(k), prob, post))
    return OutcomeDistribution(tuple(outcomes))


PhaseRule = Mapping[str, Sequence[tuple[int, float]]]


def feedforward(state: PhotonicState, outcome: str, rule: PhaseRule) -> PhotonicState:
    """Apply the outcome's phase corrections; unmapped outcomes are an error."""
    if outcome not in rule:
        raise MissingCorrection(f"no correction mapped for outcome {outcome!r}")
    for port, phi in rule[outcome]:
        state = elements.apply_phase(state, port, phi)
    return state


def fourier_feedforward_rule(
    port_groups: Sequence[Sequence[int]], d: int
) -> PhaseRule:
    """Correction undoing Fourier-outcome phases: outcome k puts phase
    -2*pi*k*j/d on every path-j port of one chosen remaining photon."""
    anchor = list(port_groups[0])
    rule: dict[str, list[tuple[int, float]]] = {}
    for k in range(d):
        rule[str(k)] = [
            (anchor[j], -2.0 * math.pi * k * j / d) for j in range(d) if k * j % d
        ]
    return rule


# --- post-selection steps usable inside a Circuit -------------------------


@dataclass(frozen=True)
class CoincidenceSelect:
    pattern: CoincidencePattern

    def postselect(self, state: PhotonicState) -> tuple[PhotonicState, float]:
        return postselect_coincidence(state, self.pattern)

    def referenced_ports(self) -> set[int]:
        return {p for g in self.pattern.groups for p in g}


@dataclass(frozen=True)
class PasPairSelect:
    """Pair polarization analysis behind an auxiliary stage.

    ``filtered`` keeps the HH and VV outcomes; ``feedforward`` keeps all four,
    flipping the sign of the odd branch with a pi phase on ``correction_port``.
    Either way the kept branches must coincide, and they merge into a single
    continuing state whose norm accounts for the summed outcome probability.
    """

    port_x: int
    port_y: int
    mode: str = "filtered"  # or "feedforward"
    correction_port: int = 0

    def postselect(self, state: PhotonicState) -> tuple[PhotonicState, float]:
        result = pas_pair_analysis(
            state, self.port_x, self.port_y, self.correction_port
        )
        p = result.prob_feedforward if self.mode == "feedforward" else result.prob_filtered
        merged = result.merged
        if merged is None or p <= 0.0:
            return PhotonicState({}, 0.0), 0.0
        out = states.scaled(
            merged,
            math.sqrt(p * state.norm_sq()),
            branch_prob=state.branch_prob * p,
        )
        return out, p

    def referenced_ports(self) -> set[int]:
        return {self.port_x, self.port_y, self.correction_port}


@dataclass(frozen=True)
class PasPairResult:
    distribution: OutcomeDistribution
    merged: PhotonicState | None  # normalized continuing state, None if all empty
    prob_filtered: float          # P(HH) + P(VV)
    prob_feedforward: float       # all four outcomes, corrected


def pas_pair_analysis(
    state: PhotonicState, port_x: int, port_y: int, correction_port: int
) -> PasPairResult:
    """Pair-analysis bookkeeping shared by both accounting conventions.

    HH/VV branches must agree as-is and HV/VH must agree with them after the
    pi correction; disagreement raises BranchMismatch because the protocol
    compiler guarantees merging branches (it is a circuit bug, not physics).
    """
    dist = project_polarization_pair(state, port_x, port_y)
    pi_rule: PhaseRule = {
        "HH": (), "VV": (),
        "HV": ((correction_port, math.pi),),
        "VH": ((correction_port, math.pi),),
    }
    merged: PhotonicState | None = None
    for o in dist.outcomes:
        if o.prob <= eps():
            continue
        post = feedforward(o.state, o.label, pi_rule)
        if merged is None:
            merged = post
        elif not states.states_close(merged, post, tol=1e-7):
            raise BranchMismatch(
                f"outcome {o.label} does not merge with the reference branch"
            )
    p_filtered = dist.prob("HH") + dist.prob("VV")
    p_ff = dist.total()
    return PasPairResult(dist, merged, p_filtered, p_ff)
