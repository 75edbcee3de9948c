"""Slack matrix of the spanning tree polytope and rectangle covers of its support.

Rows are facets (cycle inequalities for every S with 1 < |S| < n, optionally
followed by the nonnegativity inequalities in lexicographic edge order);
columns are trees in lexicographic Prüfer order.

Binary layout (``STSM``)::

    b"STSM" | version: u8 = 1 | n: u32 | rows: u32 | cols: u32 | bits

All integers are little-endian.  ``bits`` is row-major, each row packed
most-significant-bit first and padded with zeros to a byte boundary.  Row
and column indices are implied by ``n`` and the row count.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from treecert.limits import EXACT_COVER_MAX_ONES, MATRIX_CAP, CapExceededError
from treecert.protocol import CycleFacet, FacetId, NonnegFacet
from treecert.trees import NodeSet, Tree, enumerate_cut_sets, nodes_of, pruefer_decode

BINARY_MAGIC = b"STSM"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sBIII")


@dataclass(eq=False)
class SupportMatrix:
    n: int
    row_index: list[FacetId]
    col_codes: list[tuple[int, ...]]
    entries: np.ndarray
    slacks: np.ndarray | None = None
    _trees: list[Tree] | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def col_index(self) -> list[Tree]:
        if self._trees is None:
            self._trees = [pruefer_decode(code, self.n) for code in self.col_codes]
        return self._trees

    def row_position(self, facet: FacetId | NodeSet) -> int:
        if isinstance(facet, NodeSet):
            facet = CycleFacet(facet)
        lookup = self.__dict__.get("_row_lookup")
        if lookup is None:
            lookup = {f: i for i, f in enumerate(self.row_index)}
            self.__dict__["_row_lookup"] = lookup
        return lookup[facet]

    def row_masks(self) -> list[int]:
        """Each row's 1-entries as an int bitmask over column positions."""
        return [_bits_to_int(row) for row in self.entries]

    def ones(self) -> int:
        return int(self.entries.sum())


def _bits_to_int(row: np.ndarray) -> int:
    out = 0
    for j in np.flatnonzero(row):
        out |= 1 << int(j)
    return out


def facet_rows(n: int, include_nonneg: bool) -> list[FacetId]:
    rows: list[FacetId] = [CycleFacet(s) for s in enumerate_cut_sets(n)]
    if include_nonneg:
        rows.extend(NonnegFacet(e) for e in itertools.combinations(range(1, n + 1), 2))
    return rows


def slack_value(fa: FacetId, t: Tree) -> int:
    """Slack of a facet inequality at the characteristic vector of ``t``."""
    if isinstance(fa, NonnegFacet):
        return 1 if t.has_edge(*fa.edge) else 0
    mask = fa.s.mask
    inside = sum(1 for a, b in t.edges if (mask >> (a - 1)) & 1 and (mask >> (b - 1)) & 1)
    return len(fa.s) - 1 - inside


def build_support_matrix(n: int, include_nonneg: bool = False, *, cap: int = MATRIX_CAP) -> SupportMatrix:
    if n < 3:
        raise ValueError("the support matrix needs n >= 3")
    if n > cap:
        raise CapExceededError(f"support matrix capped at n={cap}, got n={n}")
    rows = facet_rows(n, include_nonneg)
    codes = list(itertools.product(range(1, n + 1), repeat=n - 2))
    trees = [pruefer_decode(code, n) for code in codes]
    slacks = np.zeros((len(rows), len(trees)), dtype=np.int16)
    cyc = [(i, f.s.mask, len(f.s) - 1) for i, f in enumerate(rows) if isinstance(f, CycleFacet)]
    nng = [(i, f.edge) for i, f in enumerate(rows) if isinstance(f, NonnegFacet)]
    for j, t in enumerate(trees):
        edge_masks = [(1 << (a - 1)) | (1 << (b - 1)) for a, b in t.edges]
        for i, mask, rank in cyc:
            slacks[i, j] = rank - sum(1 for em in edge_masks if em & mask == em)
        for i, e in nng:
            slacks[i, j] = 1 if e in t.edges else 0
    entries = (slacks >= 1).astype(np.uint8)
    return SupportMatrix(n, rows, codes, entries, slacks, trees)


# --- export / import ---------------------------------------------------------


def _code_text(code: Sequence[int]) -> str:
    return ".".join(map(str, code)) if code else "-"


def export_matrix(m: SupportMatrix, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["facet", *(_code_text(c) for c in m.col_codes)])
        for facet, row in zip(m.row_index, m.entries):
            writer.writerow([str(facet), *(int(x) for x in row)])
        return buf.getvalue().encode()
    if fmt == "bin":
        rows, cols = m.shape
        head = _HEADER.pack(BINARY_MAGIC, BINARY_VERSION, m.n, rows, cols)
        packed = np.packbits(m.entries.astype(np.uint8), axis=1, bitorder="big")
        return head + packed.tobytes()
    raise ValueError(f"unknown format {fmt!r}")


def _parse_facet(n: int, text: str) -> FacetId:
    tag, _, body = text.partition(":")
    if tag == "S":
        return CycleFacet(NodeSet.of(n, (int(x) for x in body.strip("{}").split(","))))
    if tag == "E":
        a, b = body.split("-")
        return NonnegFacet((int(a), int(b)))
    raise ValueError(f"bad facet descriptor {text!r}")


def import_matrix(data: bytes, fmt: str = "csv") -> SupportMatrix:
    if fmt == "csv":
        reader = csv.reader(io.StringIO(data.decode()))
        header = next(reader)
        codes = [tuple(int(x) for x in h.split(".")) if h != "-" else () for h in header[1:]]
        n = len(codes[0]) + 2
        rows, cells = [], []
        for line in reader:
            rows.append(_parse_facet(n, line[0]))
            cells.append([int(x) for x in line[1:]])
        entries = np.array(cells, dtype=np.uint8).reshape(len(rows), len(codes))
        return SupportMatrix(n, rows, codes, entries)
    if fmt == "bin":
        magic, version, n, nrows, ncols = _HEADER.unpack_from(data)
        if magic != BINARY_MAGIC:
            raise ValueError("not an STSM stream")
        if version != BINARY_VERSION:
            raise ValueError(f"unsupported STSM version {version}")
        stride = (ncols + 7) // 8
        body = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size, count=nrows * stride)
        entries = np.unpackbits(body.reshape(nrows, stride), axis=1, count=ncols, bitorder="big")
        cycle_rows = facet_rows(n, False)
        if nrows == len(cycle_rows):
            rows = cycle_rows
        elif nrows == len(cycle_rows) + n * (n - 1) // 2:
            rows = facet_rows(n, True)
        else:
            raise ValueError(f"row count {nrows} does not match n={n}")
        codes = list(itertools.product(range(1, n + 1), repeat=n - 2))
        if len(codes) != ncols:
            raise ValueError(f"column count {ncols} does not match n={n}")
        return SupportMatrix(n, rows, codes, entries.astype(np.uint8))
    raise ValueError(f"unknown format {fmt!r}")


# --- rectangle covers ----------------------------------------------------------


@dataclass(frozen=True)
class CoverRectangle:
    """A 1-rectangle given by row and column positions in a SupportMatrix."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]


def maximal_rectangles(m: SupportMatrix) -> list[CoverRectangle]:
    """All inclusion-maximal 1-monochromatic rectangles.

    Column sets are closed under intersection of row supports; each distinct
    nonempty intersection ``C`` yields the rectangle (rows containing C) x C.
    """
    row_masks = m.row_masks()
    intents: set[int] = set()
    for rm in row_masks:
        if not rm:
            continue
        intents |= {x & rm for x in intents if x & rm}
        intents.add(rm)
    rects = []
    for cols in sorted(intents):
        rows = tuple(i for i, rm in enumerate(row_masks) if rm & cols == cols)
        rects.append(CoverRectangle(rows, tuple(c - 1 for c in nodes_of(cols))))
    return rects


class _CoverInstance:
    """1-entries of a matrix as element bits, with per-rectangle element masks."""

    def __init__(self, m: SupportMatrix):
        self.cells = [(int(i), int(j)) for i, j in zip(*np.nonzero(m.entries))]
        self.position = {cell: k for k, cell in enumerate(self.cells)}
        self.universe = (1 << len(self.cells)) - 1
        ent = m.entries
        # two 1-entries share a 1-rectangle iff the crossing entries are 1 too
        self.compatible = []
        for i, j in self.cells:
            mask = 0
            for k, (a, b) in enumerate(self.cells):
                if ent[i, b] and ent[a, j]:
                    mask |= 1 << k
            self.compatible.append(mask)
        # least-compatible entries first gives larger greedy fooling sets
        self.order = sorted(range(len(self.cells)), key=lambda k: self.compatible[k].bit_count())

    def element_mask(self, rows: Iterable[int], cols: Iterable[int]) -> int:
        cols = list(cols)
        mask = 0
        for i in rows:
            for j in cols:
                k = self.position.get((i, j))
                if k is None:
                    raise ValueError(f"rectangle contains the 0-entry ({i}, {j})")
                mask |= 1 << k
        return mask

    def fooling_bound(self, uncovered: int) -> int:
        """Size of a greedy set of pairwise incompatible uncovered entries."""
        count = 0
        pool = uncovered
        compatible = self.compatible
        for k in self.order:
            if pool >> k & 1:
                count += 1
                pool &= ~compatible[k]
                if not pool:
                    break
        return count


def _greedy(universe: int, masks: Sequence[int]) -> list[int]:
    chosen = []
    left = universe
    while left:
        best = max(range(len(masks)), key=lambda k: (masks[k] & left).bit_count())
        if not masks[best] & left:
            raise ValueError("rectangles do not cover every 1-entry")
        chosen.append(best)
        left &= ~masks[best]
    return chosen


def _lp_bound(uncovered: int, masks: Sequence[int], allowed: Sequence[int]) -> int:
    """Ceiling of the fractional cover number of the uncovered entries."""
    elems = [e for e in range(uncovered.bit_length()) if uncovered >> e & 1]
    cols = [k for k in allowed if masks[k] & uncovered]
    a = np.array([[masks[k] >> e & 1 for k in cols] for e in elems], dtype=float)
    res = linprog(np.ones(len(cols)), A_ub=-a, b_ub=-np.ones(len(elems)), bounds=(0, 1), method="highs")
    if res.status != 0:
        return len(elems)
    return math.ceil(res.fun - 1e-6)


def exact_min_rectangle_cover(
    m: SupportMatrix, *, max_ones: int = EXACT_COVER_MAX_ONES
) -> tuple[int, list[CoverRectangle]]:
    """Minimum number of 1-rectangles covering all 1-entries, with one optimal cover.

    Branch and bound over maximal rectangles: branch on the uncovered entry
    with the fewest usable covering rectangles; a rectangle whose branch is
    finished is excluded from its siblings.  Nodes are pruned by a greedy
    fooling-set bound, and by the LP relaxation when that is not enough.
    """
    ones = m.ones()
    if ones > max_ones:
        raise CapExceededError(f"exact cover capped at {max_ones} one-entries, matrix has {ones}")
    if ones == 0:
        return 0, []
    inst = _CoverInstance(m)
    rects = maximal_rectangles(m)
    masks = [inst.element_mask(r.rows, r.cols) for r in rects]
    covering = [[k for k, mk in enumerate(masks) if mk >> e & 1] for e in range(len(inst.cells))]

    best = _greedy(inst.universe, masks)
    stack: list[int] = []

    def search(uncovered: int, banned: int) -> None:
        nonlocal best
        if not uncovered:
            if len(stack) < len(best):
                best = list(stack)
            return
        budget = len(best) - len(stack)
        if inst.fooling_bound(uncovered) >= budget:
            return
        pool, pivot, options = uncovered, -1, None
        while pool:
            low = pool & -pool
            e = low.bit_length() - 1
            usable = [k for k in covering[e] if not banned >> k & 1]
            if options is None or len(usable) < len(options):
                pivot, options = e, usable
                if not usable:
                    return
            pool ^= low
        allowed = [k for k in range(len(masks)) if not banned >> k & 1]
        if _lp_bound(uncovered, masks, allowed) >= budget:
            return
        options.sort(key=lambda k: -(masks[k] & uncovered).bit_count())
        for k in options:
            stack.append(k)
            search(uncovered & ~masks[k], banned)
            stack.pop()
            banned |= 1 << k

    search(inst.universe, 0)
    return len(best), [rects[k] for k in best]


def greedy_rectangle_cover(m: SupportMatrix, rects: Iterable) -> int:
    """Size of a greedy max-new-coverage subcover of ``rects``.

    Each rectangle needs ``rows`` (row positions, NodeSets or facets) and
    ``cols`` (column positions).  Raises ValueError naming an uncovered entry
    if ``rects`` do not cover the support.
    """
    inst = _CoverInstance(m)
    masks = []
    for r in rects:
        rows = [x if isinstance(x, int) else m.row_position(x) for x in r.rows]
        masks.append(inst.element_mask(rows, r.cols))
    union = 0
    for mk in masks:
        union |= mk
    missing = inst.universe & ~union
    if missing:
        i, j = inst.cells[(missing & -missing).bit_length() - 1]
        raise ValueError(f"1-entry ({m.row_index[i]}, column {j}) is not covered")
    return len(_greedy(inst.universe, masks))
