"""Sparse multi-photon Fock states over (path, polarization) modes.

A mode is a spatial port paired with a polarization label.  A basis ket is
a bosonic occupation multiset over modes, kept in a canonical sorted form
so it can serve as a dictionary key.  A state is a sparse map from kets to
complex amplitudes plus ``branch_prob``, the probability of the chain of
post-selections that produced this branch.  Amplitudes may be left
unnormalized inside a pipeline; ``branch_prob`` carries the conditioning
so that norm**2 times ``branch_prob`` is always the probability of the
branch as a whole.

States are values: every operation returns a new instance and nothing
here mutates its arguments.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import EmptyState, PortCollision

H = "H"
V = "V"
POLARIZATIONS = (H, V)

Mode = tuple[int, str]
FockTerm = tuple[tuple[Mode, int], ...]

_DEFAULT_EPS = 1e-9


def eps() -> float:
    """Amplitude/probability tolerance; GHZFORGE_EPS overrides the default."""
    raw = os.environ.get("GHZFORGE_EPS")
    return _DEFAULT_EPS if raw is None else float(raw)


def mode(port: int, pol: str) -> Mode:
    if not isinstance(port, int) or port < 0:
        raise ValueError(f"port must be a non-negative integer, got {port!r}")
    if pol not in POLARIZATIONS:
        raise ValueError(f"polarization must be 'H' or 'V', got {pol!r}")
    return (port, pol)


def fock_term(occupations: Iterable[tuple[Mode, int]]) -> FockTerm:
    """Canonical ket: modes sorted port-major then polarization, counts merged."""
    merged: dict[Mode, int] = {}
    for raw_mode, count in occupations:
        m = mode(*raw_mode)
        if not isinstance(count, int) or count < 1:
            raise ValueError(f"occupation count must be a positive integer, got {count!r}")
        merged[m] = merged.get(m, 0) + count
    return tuple(sorted(merged.items()))


def ket(*modes_: Mode) -> FockTerm:
    """Ket with one photon per listed mode (repeats accumulate)."""
    return fock_term((m, 1) for m in modes_)


def term_photon_count(term: FockTerm) -> int:
    return sum(count for _, count in term)


def term_ports(term: FockTerm) -> set[int]:
    return {port for (port, _), _ in term}


def photons_in_port(term: FockTerm, port: int) -> int:
    return sum(count for (p, _), count in term if p == port)


@dataclass
class PhotonicState:
    """Sparse map FockTerm -> amplitude with branch-probability bookkeeping."""

    terms: dict[FockTerm, complex]
    branch_prob: float = 1.0

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())

    def photon_number(self) -> int:
        """Total photon number of the (uniform) sector; 0 for the vacuum."""
        if not self.terms:
            return 0
        return term_photon_count(next(iter(self.terms)))

    def ports(self) -> set[int]:
        out: set[int] = set()
        for term in self.terms:
            out |= term_ports(term)
        return out

    def amplitude(self, term: FockTerm) -> complex:
        return self.terms.get(fock_term(term), 0j)

    def sorted_items(self) -> list[tuple[FockTerm, complex]]:
        return sorted(self.terms.items())

    def pretty(self) -> str:
        parts = []
        for term, amp in self.sorted_items():
            labels = " ".join(f"{p}{pol}" for (p, pol), c in term for _ in range(c))
            parts.append(f"({amp.real:+.4f}{amp.imag:+.4f}j)|{labels}>")
        body = "\n  ".join(parts) if parts else "(empty)"
        return f"PhotonicState branch_prob={self.branch_prob:.6g}\n  {body}"

    def __iter__(self) -> Iterator[tuple[FockTerm, complex]]:
        return iter(self.sorted_items())


def vacuum() -> PhotonicState:
    """Zero-photon state; tensoring with it is the identity."""
    return PhotonicState({(): 1.0 + 0j})


def _pruned(terms: dict[FockTerm, complex]) -> dict[FockTerm, complex]:
    tol = eps()
    return {t: a for t, a in terms.items() if abs(a) >= tol}


def _check_uniform_sector(terms: dict[FockTerm, complex]) -> None:
    counts = {term_photon_count(t) for t in terms}
    if len(counts) > 1:
        raise ValueError(f"mixed photon-number sectors: {sorted(counts)}")


def make_state(
    kets: Iterable[tuple[FockTerm, complex]], branch_prob: float = 1.0
) -> PhotonicState:
    """Build a canonical, pruned state; duplicate kets have amplitudes summed.

    Raises EmptyState when every amplitude cancels or falls below tolerance.
    """
    acc: dict[FockTerm, complex] = {}
    for raw_term, amp in kets:
        amp = complex(amp)
        if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
            raise ValueError(f"non-finite amplitude {amp!r}")
        term = fock_term(raw_term)
        acc[term] = acc.get(term, 0j) + amp
    terms = _pruned(acc)
    if not terms:
        raise EmptyState("all amplitudes cancel or vanish")
    _check_uniform_sector(terms)
    if sum(abs(a) ** 2 for a in terms.values()) > 1.0 + eps():
        raise ValueError("squared norm exceeds 1; amplitudes are not a sub-state")
    return PhotonicState(terms, branch_prob)


def scaled(
    state: PhotonicState, factor: complex, branch_prob: float | None = None
) -> PhotonicState:
    terms = _pruned({t: a * factor for t, a in state.terms.items()})
    return PhotonicState(
        terms, state.branch_prob if branch_prob is None else branch_prob
    )


def absorb_branch(state: PhotonicState) -> PhotonicState:
    """Fold the branch probability into the amplitudes.

    The result has branch_prob 1 and amplitudes scaled by sqrt(branch_prob),
    i.e. the raw unnormalized amplitudes a pipeline would carry if no
    intermediate renormalization had happened.
    """
    return scaled(state, math.sqrt(state.branch_prob), branch_prob=1.0)


def norm(state: PhotonicState) -> float:
    return math.sqrt(state.norm_sq())


def normalize(state: PhotonicState) -> PhotonicState:
    """Rescale to unit norm; branch_prob is left untouched."""
    n = norm(state)
    if n <= eps():
        raise EmptyState("cannot normalize a (near-)zero state")
    return scaled(state, 1.0 / n)


def tensor(a: PhotonicState, b: PhotonicState) -> PhotonicState:
    """Product state on disjoint spatial ports; branch probabilities multiply."""
    shared = a.ports() & b.ports()
    if shared:
        raise PortCollision(f"operands share spatial ports {sorted(shared)}")
    terms: dict[FockTerm, complex] = {}
    for ta, aa in a.terms.items():
        for tb, ab in b.terms.items():
            terms[tuple(sorted(ta + tb))] = aa * ab
    return PhotonicState(_pruned(terms), a.branch_prob * b.branch_prob)


def inner_product(a: PhotonicState, b: PhotonicState) -> complex:
    """<a|b> over matching kets (amplitudes of ``a`` conjugated)."""
    if len(a.terms) > len(b.terms):
        return complex(
            sum(a.terms[t].conjugate() * ab for t, ab in b.terms.items() if t in a.terms)
        )
    return complex(
        sum(aa.conjugate() * b.terms[t] for t, aa in a.terms.items() if t in b.terms)
    )


def states_close(a: PhotonicState, b: PhotonicState, tol: float | None = None) -> bool:
    """Term-by-term amplitude agreement within tolerance."""
    tol = eps() if tol is None else tol
    for term in set(a.terms) | set(b.terms):
        if abs(a.terms.get(term, 0j) - b.terms.get(term, 0j)) > tol:
            return False
    return True


def state_to_jsonable(state: PhotonicState) -> list[dict]:
    """Canonical JSON form: terms sorted, one object per ket."""
    out = []
    for term, amp in state.sorted_items():
        out.append(
            {
                "modes": [[port, pol, count] for (port, pol), count in term],
                "re": amp.real,
                "im": amp.imag,
            }
        )
    return out


def state_from_jsonable(data: list[dict], branch_prob: float = 1.0) -> PhotonicState:
    kets = []
    for entry in data:
        term = fock_term(((int(p), str(pol)), int(c)) for p, pol, c in entry["modes"])
        kets.append((term, complex(float(entry["re"]), float(entry["im"]))))
    return make_state(kets, branch_prob=branch_prob)


def state_to_json(state: PhotonicState) -> str:
    return json.dumps(state_to_jsonable(state), indent=2)


def state_from_json(text: str) -> PhotonicState:
    return state_from_jsonable(json.loads(text))
