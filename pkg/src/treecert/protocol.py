"""Witnesses, certificates, and the Alice/Bob/Prover procedures.

Two protocols live here.  The naive one sends a whole witness triple
``(u, t, v)``.  The parsimonious one sends ``h(u, t, v) = (u, v, pi, delta, d)``:
``pi`` says which half of [n] (closer to u, or closer to v) holds ``t``, ``delta``
says whether ``t`` sits left of its anchor (u or v), and ``d`` is the floor of
log2 of the distance to the anchor.  Alice and Bob both expand a certificate
back into the interval of labels ``r`` with ``h(u, r, v) = c``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from treecert.trees import NodeSet, Tree, mask_of, nodes_of


@dataclass(frozen=True, order=True)
class Witness:
    """A triple (u, t, v); u and v are the endpoints, t the cut node."""

    u: int
    t: int
    v: int

    def __post_init__(self):
        if len({self.u, self.t, self.v}) != 3:
            raise ValueError(f"witness entries must be pairwise distinct: {self.as_tuple()}")

    @classmethod
    def canonical(cls, u: int, t: int, v: int) -> "Witness":
        return cls(u, t, v) if u < v else cls(v, t, u)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.u, self.t, self.v)


@dataclass(frozen=True, order=True)
class Certificate:
    u: int
    v: int
    pi: int
    delta: int
    d: int

    def __post_init__(self):
        if not self.u < self.v:
            raise ValueError(f"certificate needs u < v, got u={self.u}, v={self.v}")
        if self.pi not in (0, 1) or self.delta not in (0, 1):
            raise ValueError("pi and delta are bits")
        if self.d < 0:
            raise ValueError("d must be non-negative")

    def fits(self, n: int) -> bool:
        return 1 <= self.u and self.v <= n and self.d <= floor_log2(n)

    def to_text(self) -> str:
        return f"{self.u},{self.v},{self.pi},{self.delta},{self.d}"

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        u, v, pi, delta, d = (int(x) for x in text.strip().strip("()").split(","))
        return cls(u, v, pi, delta, d)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True, order=True)
class CycleFacet:
    s: NodeSet

    def __str__(self) -> str:
        return f"S:{self.s}"


@dataclass(frozen=True, order=True)
class NonnegFacet:
    edge: tuple[int, int]

    def __post_init__(self):
        a, b = self.edge
        if a == b:
            raise ValueError("nonnegativity facet needs two distinct nodes")
        object.__setattr__(self, "edge", (min(a, b), max(a, b)))

    def __str__(self) -> str:
        return f"E:{self.edge[0]}-{self.edge[1]}"


FacetId = Union[CycleFacet, NonnegFacet]


@dataclass(frozen=True, order=True)
class Cyc:
    cert: Certificate

    def to_text(self) -> str:
        return f"C:{self.cert.to_text()}"


@dataclass(frozen=True, order=True)
class Nng:
    edge: tuple[int, int]

    def __post_init__(self):
        a, b = self.edge
        if a == b:
            raise ValueError("edge needs two distinct nodes")
        object.__setattr__(self, "edge", (min(a, b), max(a, b)))

    def to_text(self) -> str:
        return f"N:{self.edge[0]}-{self.edge[1]}"


CombinedCertificate = Union[Cyc, Nng]


def floor_log2(x: int) -> int:
    if x < 1:
        raise ValueError("floor_log2 needs a positive integer")
    return x.bit_length() - 1


# --- witnesses -------------------------------------------------------------


def is_witness(s: NodeSet, t: Tree, w: Witness | tuple[int, int, int]) -> bool:
    u, x, v = w.as_tuple() if isinstance(w, Witness) else w
    if u == v or x == u or x == v:
        return False
    return naive_alice_accept(s, (u, x, v)) and naive_bob_accept(t, (u, x, v))


def iter_witnesses(s: NodeSet, t: Tree) -> Iterator[Witness]:
    """All witnesses with u < v, in lexicographic (u, t, v) order."""
    members = s.members
    found = []
    for u, v in itertools.combinations(members, 2):
        for x in nodes_of(t.path_interior_mask(u, v) & ~s.mask):
            found.append(Witness(u, x, v))
    found.sort()
    return iter(found)


def witness_exists(s: NodeSet, t: Tree) -> bool:
    for u, v in itertools.combinations(s.members, 2):
        if t.path_interior_mask(u, v) & ~s.mask:
            return True
    return False


def mu(w: Witness | tuple[int, int, int]) -> int:
    u, x, v = w.as_tuple() if isinstance(w, Witness) else w
    return abs(x - u) + abs(x - v)


def valid_witnesses(s: NodeSet, t: Tree) -> list[Witness]:
    """Witnesses with u < v minimizing mu, sorted lexicographically."""
    best: list[Witness] = []
    best_mu = None
    for w in iter_witnesses(s, t):
        m = mu(w)
        if best_mu is None or m < best_mu:
            best, best_mu = [w], m
        elif m == best_mu:
            best.append(w)
    return best


TIE_BREAKS: dict[str, Callable[[list[Witness]], Witness]] = {
    "min": min,
    "max": max,
}


def prover_witness(s: NodeSet, t: Tree, tie_break: str = "min") -> Witness | None:
    valid = valid_witnesses(s, t)
    if not valid:
        return None
    return TIE_BREAKS[tie_break](valid)


def prover_certificate(s: NodeSet, t: Tree, tie_break: str = "min") -> Certificate | None:
    """The honest prover's message, or None when the induced forest is connected."""
    w = prover_witness(s, t, tie_break)
    if w is None:
        return None
    return encode_certificate(w.u, w.t, w.v)


# --- the certificate map h -------------------------------------------------


def range_split(u: int, v: int, n: int) -> tuple[range, range]:
    """(R_u, R_v): labels at least as close to u, and labels strictly closer to v."""
    if not u < v:
        raise ValueError(f"range_split needs u < v, got u={u}, v={v}")
    mid = (u + v) // 2
    return range(1, min(mid, n) + 1), range(mid + 1, n + 1)


def in_v_range(u: int, v: int, x: int) -> bool:
    return 2 * x > u + v


def encode_certificate(u: int, t: int, v: int) -> Certificate:
    if not u < v:
        raise ValueError(f"h needs u < v, got u={u}, v={v}")
    if t == u or t == v:
        raise ValueError(f"t={t} coincides with an endpoint")
    pi = 1 if in_v_range(u, v, t) else 0
    anchor = v if pi else u
    delta = 1 if t < anchor else 0
    return Certificate(u, v, pi, delta, floor_log2(abs(t - anchor)))


def candidate_interval(c: Certificate, n: int) -> tuple[int, int]:
    """Inclusive bounds (lo, hi) of the r with h(u, r, v) = c; empty when lo > hi."""
    anchor = c.v if c.pi else c.u
    step = 1 << c.d
    if c.delta:
        lo, hi = anchor - 2 * step + 1, anchor - step
    else:
        lo, hi = anchor + step, anchor + 2 * step - 1
    mid = (c.u + c.v) // 2
    if c.pi:
        lo = max(lo, mid + 1)
    else:
        hi = min(hi, mid)
    return max(lo, 1), min(hi, n)


def candidate_rs(c: Certificate, n: int) -> list[int]:
    lo, hi = candidate_interval(c, n)
    return [r for r in range(lo, hi + 1) if r != c.u and r != c.v]


def candidate_mask(c: Certificate, n: int) -> int:
    return mask_of(candidate_rs(c, n))


# --- parsimonious protocol -------------------------------------------------


def alice_accept(s: NodeSet, c: Certificate) -> bool:
    if c.u not in s or c.v not in s:
        return False
    return candidate_mask(c, s.n) & s.mask == 0


def bob_accept(t: Tree, c: Certificate) -> bool:
    if c.v > t.n:
        return False
    cands = candidate_mask(c, t.n)
    return cands != 0 and t.path_interior_mask(c.u, c.v) & cands != 0


def iter_certificates(n: int) -> Iterator[Certificate]:
    """The full certificate space for n, in (u, v, pi, delta, d) order."""
    top = floor_log2(n)
    for u, v in itertools.combinations(range(1, n + 1), 2):
        for pi in (0, 1):
            for delta in (0, 1):
                for d in range(top + 1):
                    yield Certificate(u, v, pi, delta, d)


def certificate_space_size(n: int) -> int:
    if n < 3:
        raise ValueError("certificate space is defined for n >= 3")
    return math.comb(n, 2) * 4 * (floor_log2(n) + 1)


def cost_bits(n: int) -> float:
    return math.log2(certificate_space_size(n))


def cost_reference(n: int) -> float:
    """2 log2 n + log2 log2 n, the leading terms of the protocol cost."""
    return 2 * math.log2(n) + math.log2(math.log2(n))


def cost_residual(n: int) -> float:
    return cost_bits(n) - cost_reference(n)


# --- naive protocol ----------------------------------------------------------


def naive_alice_accept(s: NodeSet, w: Witness | tuple[int, int, int]) -> bool:
    u, x, v = w.as_tuple() if isinstance(w, Witness) else w
    return u in s and v in s and x not in s


def naive_bob_accept(t: Tree, w: Witness | tuple[int, int, int]) -> bool:
    u, x, v = w.as_tuple() if isinstance(w, Witness) else w
    if u == v:
        return False
    return t.is_on_path(u, x, v)


# --- combined protocol (cycle rows plus nonnegativity rows) -------------------


def combined_alice_accept(fa: FacetId, cc: CombinedCertificate) -> bool:
    if isinstance(cc, Nng):
        return isinstance(fa, NonnegFacet) and fa.edge == cc.edge
    if not isinstance(fa, CycleFacet):
        return False
    return alice_accept(fa.s, cc.cert)


def combined_bob_accept(t: Tree, cc: CombinedCertificate) -> bool:
    if isinstance(cc, Nng):
        return t.has_edge(*cc.edge)
    return bob_accept(t, cc.cert)


def combined_prover(fa: FacetId, t: Tree, tie_break: str = "min") -> CombinedCertificate | None:
    if isinstance(fa, NonnegFacet):
        return Nng(fa.edge) if t.has_edge(*fa.edge) else None
    cert = prover_certificate(fa.s, t, tie_break)
    return None if cert is None else Cyc(cert)


def iter_combined_certificates(n: int) -> Iterator[CombinedCertificate]:
    for c in iter_certificates(n):
        yield Cyc(c)
    for e in itertools.combinations(range(1, n + 1), 2):
        yield Nng(e)


def combined_from_text(text: str) -> CombinedCertificate:
    tag, _, body = text.strip().partition(":")
    if tag == "C":
        return Cyc(Certificate.from_text(body))
    if tag == "N":
        a, b = body.split("-")
        return Nng((int(a), int(b)))
    raise ValueError(f"unknown combined certificate tag {tag!r}")
