"""Exhaustive and randomized correctness checks for both protocols.

Exhaustive checks work per certificate: the set of rows Alice accepts and the
set of columns Bob accepts are computed once as bitmasks, and the cross
product is compared against the connectivity oracle with a few big-int
operations.  Randomized checks draw instances from a seeded generator.
"""
from __future__ import annotations

import itertools
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from treecert.limits import EXHAUSTIVE_CAP, EXHAUSTIVE_CAP_EXTENDED, CapExceededError
from treecert.protocol import (
    Certificate,
    alice_accept,
    bob_accept,
    candidate_rs,
    combined_alice_accept,
    combined_bob_accept,
    combined_prover,
    floor_log2,
    is_witness,
    iter_certificates,
    iter_combined_certificates,
    naive_alice_accept,
    naive_bob_accept,
    prover_certificate,
    witness_exists,
)
from treecert.trees import (
    NodeSet,
    Tree,
    enumerate_cut_sets,
    enumerate_trees,
    f_oracle,
    mask_of,
    nodes_of,
    pruefer_decode,
    random_tree,
)

MODES = ("exhaustive", "randomized")
CHUNKS = 16


@dataclass(frozen=True, order=True)
class Violation:
    kind: str
    evidence: str
    s: str
    t: str

    def to_text(self) -> str:
        return f"{self.kind} evidence={self.evidence} S={self.s} T={self.t}"


@dataclass
class VerificationReport:
    check: str
    n: int
    mode: str
    checks_run: Counter = field(default_factory=Counter)
    violations: list[Violation] = field(default_factory=list)
    elapsed: float = 0.0
    seed: int | None = None
    command: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "VerificationReport") -> None:
        self.checks_run.update(other.checks_run)
        self.violations.extend(other.violations)

    def finish(self, started: float) -> "VerificationReport":
        self.violations.sort()
        self.elapsed = time.perf_counter() - started
        return self

    def to_text(self, timing: bool = True) -> str:
        lines = [
            f"check: {self.check}",
            f"n: {self.n}",
            f"mode: {self.mode}",
            f"seed: {'-' if self.seed is None else self.seed}",
        ]
        for key in sorted(self.checks_run):
            lines.append(f"checks.{key}: {self.checks_run[key]}")
        lines.append(f"violations: {len(self.violations)}")
        lines.append(f"status: {'PASS' if self.passed else 'FAIL'}")
        if timing:
            lines.append(f"elapsed_s: {self.elapsed:.3f}")
        if self.violations:
            lines.append(f"reproduce: {self.command}")
            lines.extend(f"violation: {v.to_text()}" for v in self.violations)
        return "\n".join(lines) + "\n"


@dataclass
class Rectangle:
    """Inputs on which both parties accept a fixed certificate."""

    certificate: Certificate
    rows: list[NodeSet]
    cols: list[int]


def _command(check: str, n: int, mode: str, samples: int | None = None, seed: int | None = None) -> str:
    cmd = f"treecert verify --n {n} --mode {mode}"
    if mode == "randomized":
        cmd += f" --samples {samples} --seed {seed}"
    if check == "triangle":
        cmd += " --triangle"
    return cmd


def _check_cap(n: int, cap: int) -> None:
    if n < 3:
        raise ValueError("protocol checks need n >= 3")
    if n > cap:
        raise CapExceededError(f"exhaustive mode is capped at n={cap}, got n={n}")


# --- exhaustive universe --------------------------------------------------------


@dataclass
class Universe:
    """All rows and columns for one n, with the oracle's 1-entries as column masks."""

    n: int
    sets: list[NodeSet]
    trees: list[Tree]
    ones: list[int]

    def zero_cols(self, i: int) -> int:
        return ~self.ones[i] & ((1 << len(self.trees)) - 1)


@lru_cache(maxsize=4)
def universe(n: int) -> Universe:
    sets = list(enumerate_cut_sets(n))
    trees = list(enumerate_trees(n))
    ones = []
    for s in sets:
        mask = 0
        for j, t in enumerate(trees):
            if f_oracle(s, t):
                mask |= 1 << j
        ones.append(mask)
    return Universe(n, sets, trees, ones)


def _row_mask(sets: Sequence[NodeSet], accept: Callable[[NodeSet], bool]) -> int:
    mask = 0
    for i, s in enumerate(sets):
        if accept(s):
            mask |= 1 << i
    return mask


def _col_mask(trees: Sequence[Tree], accept: Callable[[Tree], bool]) -> int:
    mask = 0
    for j, t in enumerate(trees):
        if accept(t):
            mask |= 1 << j
    return mask


def certificate_masks(n: int, c: Certificate) -> tuple[int, int]:
    """(row mask over sets, column mask over trees) accepted for ``c``."""
    uni = universe(n)
    rows = _row_mask(uni.sets, lambda s: alice_accept(s, c))
    if not rows or not candidate_rs(c, n):
        return rows, 0
    return rows, _col_mask(uni.trees, lambda t: bob_accept(t, c))


def extract_rectangle(c: Certificate, n: int, *, cap: int = EXHAUSTIVE_CAP_EXTENDED) -> Rectangle:
    _check_cap(n, cap)
    uni = universe(n)
    rows = _row_mask(uni.sets, lambda s: alice_accept(s, c))
    cols = _col_mask(uni.trees, lambda t: bob_accept(t, c))
    return Rectangle(c, [uni.sets[i - 1] for i in nodes_of(rows)], [j - 1 for j in nodes_of(cols)])


def _soundness_chunk(n: int, certs: list[Certificate]) -> VerificationReport:
    uni = universe(n)
    rep = VerificationReport("soundness", n, "exhaustive")
    for c in certs:
        rows, cols = certificate_masks(n, c)
        rep.checks_run["certificates"] += 1
        rep.checks_run["accepted_pairs"] += rows.bit_count() * cols.bit_count()
        if not rows or not cols:
            continue
        for i in nodes_of(rows):
            bad = uni.zero_cols(i - 1) & cols
            if bad:
                j = (bad & -bad).bit_length() - 1
                rep.violations.append(
                    Violation("accepted-zero", c.to_text(), str(uni.sets[i - 1]), uni.trees[j].to_text())
                )
    return rep


def _split(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items)))
    return [items[k::parts] for k in range(parts)]


def _run_chunks(fn, n: int, chunks: list[list], threads: int, progress=None) -> list[VerificationReport]:
    if threads <= 1 or len(chunks) <= 1:
        out = []
        for k, chunk in enumerate(chunks, 1):
            out.append(fn(n, chunk))
            if progress is not None:
                progress(k, len(chunks))
        return out
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, [n] * len(chunks), chunks))


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def check_soundness(
    n: int,
    mode: str = "exhaustive",
    *,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    cap: int = EXHAUSTIVE_CAP,
    progress: Callable[[int, int], None] | None = None,
) -> VerificationReport:
    """Every (S, T) accepted under some certificate has f(S, T) = 1."""
    started = time.perf_counter()
    if mode == "exhaustive":
        _check_cap(n, cap)
        uni = universe(n)
        threads = _resolve_threads(threads)
        chunks = _split(list(iter_certificates(n)), max(threads, CHUNKS))
        rep = VerificationReport("soundness", n, mode, command=_command("soundness", n, mode))
        rep.checks_run["sets"] = len(uni.sets)
        rep.checks_run["trees"] = len(uni.trees)
        for part in _run_chunks(_soundness_chunk, n, chunks, threads, progress):
            rep.merge(part)
        return rep.finish(started)
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    if n < 3:
        raise ValueError("protocol checks need n >= 3")
    rng = np.random.default_rng(seed)
    rep = VerificationReport("soundness", n, mode, seed=seed,
                             command=_command("soundness", n, mode, samples, seed))
    top = floor_log2(n)
    for _ in range(samples):
        t = random_tree(n, rng)
        u, v = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False).tolist())
        c = Certificate(u, v, int(rng.integers(2)), int(rng.integers(2)), int(rng.integers(top + 1)))
        s = _alice_friendly_set(n, c, rng)
        rep.checks_run["samples"] += 1
        if alice_accept(s, c) and bob_accept(t, c):
            rep.checks_run["accepted"] += 1
            if f_oracle(s, t) != 1:
                rep.violations.append(Violation("accepted-zero", c.to_text(), str(s), t.to_text()))
    return rep.finish(started)


def _alice_friendly_set(n: int, c: Certificate, rng: np.random.Generator) -> NodeSet:
    """A random S containing u, v and avoiding the candidates of ``c``."""
    avoid = set(candidate_rs(c, n))
    keep = rng.integers(2, size=n + 1)
    members = {c.u, c.v} | {x for x in range(1, n + 1) if keep[x] and x not in avoid}
    if len(members) == n:
        members.discard(int(rng.choice([x for x in range(1, n + 1) if x not in (c.u, c.v)])))
    return NodeSet.of(n, members)


def _random_set(n: int, rng: np.random.Generator) -> NodeSet:
    while True:
        keep = rng.integers(2, size=n)
        size = int(keep.sum())
        if 1 < size < n:
            return NodeSet.of(n, (i + 1 for i in np.flatnonzero(keep)))


def _completeness_pair(rep: VerificationReport, s: NodeSet, t: Tree, tie_break: str) -> None:
    f = f_oracle(s, t)
    c = prover_certificate(s, t, tie_break)
    rep.checks_run["pairs"] += 1
    if f == 0:
        if c is not None:
            rep.violations.append(Violation("prover-on-zero", c.to_text(), str(s), t.to_text()))
        return
    rep.checks_run["ones"] += 1
    if c is None:
        rep.violations.append(Violation("no-certificate", "-", str(s), t.to_text()))
        return
    a, b = alice_accept(s, c), bob_accept(t, c)
    if not (a and b):
        who = "alice" if not a else "bob"
        rep.violations.append(Violation(f"{who}-rejects", c.to_text(), str(s), t.to_text()))


def _completeness_chunk(n: int, job: list) -> VerificationReport:
    uni = universe(n)
    tie_break, indices = job[0], job[1:]
    rep = VerificationReport("completeness", n, "exhaustive")
    for i in indices:
        s = uni.sets[i]
        for t in uni.trees:
            _completeness_pair(rep, s, t, tie_break)
    return rep


def check_completeness(
    n: int,
    mode: str = "exhaustive",
    *,
    samples: int = 10_000,
    seed: int = 0,
    tie_break: str = "min",
    threads: int = 1,
    cap: int = EXHAUSTIVE_CAP,
    progress: Callable[[int, int], None] | None = None,
) -> VerificationReport:
    """The honest prover's certificate is accepted exactly on the 1-entries."""
    started = time.perf_counter()
    check = "completeness" if tie_break == "min" else f"completeness[{tie_break}]"
    if mode == "exhaustive":
        _check_cap(n, cap)
        uni = universe(n)
        threads = _resolve_threads(threads)
        jobs = [[tie_break, *chunk] for chunk in _split(list(range(len(uni.sets))), max(threads, CHUNKS))]
        rep = VerificationReport(check, n, mode, command=_command(check, n, mode))
        for part in _run_chunks(_completeness_chunk, n, jobs, threads, progress):
            rep.merge(part)
        return rep.finish(started)
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    if n < 3:
        raise ValueError("protocol checks need n >= 3")
    rng = np.random.default_rng(seed)
    rep = VerificationReport(check, n, mode, seed=seed, command=_command(check, n, mode, samples, seed))
    for _ in range(samples):
        t = random_tree(n, rng)
        _completeness_pair(rep, _random_set(n, rng), t, tie_break)
    return rep.finish(started)


# --- triangle lemma --------------------------------------------------------------


def _triangle_holds(s: NodeSet, t: Tree, u: int, x: int, v: int, w: int) -> bool:
    return is_witness(s, t, (v, x, w)) or is_witness(s, t, (w, x, u))


def check_triangle_lemma(
    n: int,
    samples: int = 100_000,
    seed: int = 0,
    *,
    mode: str = "randomized",
    replay: int = 2_000,
    cap: int = EXHAUSTIVE_CAP,
) -> VerificationReport:
    """If (u, t, v) is a witness and w is in S, then (v, t, w) or (w, t, u) is one.

    Randomized mode runs a compiled sampler; its first ``replay`` samples are
    re-decided with the library's own tree and witness code, and any
    disagreement is reported as a violation.
    """
    started = time.perf_counter()
    if mode == "exhaustive":
        _check_cap(n, cap)
        uni = universe(n)
        rep = VerificationReport("triangle", n, mode, command=_command("triangle", n, mode))
        for t in uni.trees:
            for s in uni.sets:
                members = s.members
                for u, v in itertools.permutations(members, 2):
                    for x in nodes_of(t.path_interior_mask(u, v) & ~s.mask):
                        for w in members:
                            rep.checks_run["instances"] += 1
                            if len({u, v, w}) < 3:
                                rep.checks_run["degenerate"] += 1
                            if not _triangle_holds(s, t, u, x, v, w):
                                rep.violations.append(
                                    Violation("triangle", f"u={u},t={x},v={v},w={w}", str(s), t.to_text())
                                )
        return rep.finish(started)
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    if n < 3:
        raise ValueError("the triangle lemma needs n >= 3")
    from treecert._kernels import triangle_kernel

    rep = VerificationReport("triangle", n, mode, seed=seed,
                             command=_command("triangle", n, mode, samples, seed))
    replay = min(replay, samples)
    counts, rec_seq, rec_nodes, rec_s, rec_ok, bad_seq, bad_nodes, bad_s = triangle_kernel(
        n, samples, seed & 0xFFFFFFFF, replay
    )
    rep.checks_run["instances"] = int(counts[0])
    rep.checks_run["degenerate"] = int(counts[1])
    if counts[2]:
        t = pruefer_decode(bad_seq.tolist(), n)
        s = NodeSet(n, mask_of(np.flatnonzero(bad_s).tolist()))
        u, x, v, w = bad_nodes.tolist()
        rep.violations.append(Violation("triangle", f"u={u},t={x},v={v},w={w}", str(s), t.to_text()))
        if counts[2] > 1:
            rep.checks_run["violations_total"] = int(counts[2])
    for k in range(replay):
        t = pruefer_decode(rec_seq[k].tolist(), n)
        s = NodeSet(n, mask_of(np.flatnonzero(rec_s[k]).tolist()))
        u, x, v, w = rec_nodes[k].tolist()
        ok_vw, ok_wu = bool(rec_ok[k, 0]), bool(rec_ok[k, 1])
        rep.checks_run["replayed"] += 1
        agree = (
            is_witness(s, t, (u, x, v))
            and is_witness(s, t, (v, x, w)) == ok_vw
            and is_witness(s, t, (w, x, u)) == ok_wu
        )
        if not agree:
            rep.violations.append(
                Violation("sampler-mismatch", f"u={u},t={x},v={v},w={w}", str(s), t.to_text())
            )
    return rep.finish(started)


# --- cover restatement and oracle cross-checks ---------------------------------------


def check_rectangle_cover(n: int, *, cap: int = EXHAUSTIVE_CAP) -> VerificationReport:
    """Certificate rectangles are 1-monochromatic and their union is the 1-support."""
    started = time.perf_counter()
    _check_cap(n, cap)
    uni = universe(n)
    rep = VerificationReport("rectangles", n, "exhaustive", command=f"treecert cover --n {n}")
    covered = [0] * len(uni.sets)
    for c in iter_certificates(n):
        rows, cols = certificate_masks(n, c)
        rep.checks_run["rectangles"] += 1
        if not cols:
            continue
        rep.checks_run["nonempty_rectangles"] += 1 if rows else 0
        for i in nodes_of(rows):
            covered[i - 1] |= cols
            bad = uni.zero_cols(i - 1) & cols
            if bad:
                j = (bad & -bad).bit_length() - 1
                rep.violations.append(
                    Violation("zero-in-rectangle", c.to_text(), str(uni.sets[i - 1]), uni.trees[j].to_text())
                )
    for i, s in enumerate(uni.sets):
        missing = uni.ones[i] & ~covered[i]
        rep.checks_run["ones"] += uni.ones[i].bit_count()
        if missing:
            j = (missing & -missing).bit_length() - 1
            rep.violations.append(Violation("uncovered-one", "-", str(s), uni.trees[j].to_text()))
    return rep.finish(started)


def cross_check_naive(n: int, *, cap: int = EXHAUSTIVE_CAP) -> VerificationReport:
    """The triple protocol computes f, and parsimonious acceptance implies a witness."""
    started = time.perf_counter()
    _check_cap(n, cap)
    uni = universe(n)
    rep = VerificationReport("naive", n, "exhaustive", command=f"treecert verify --n {n} --mode exhaustive")
    accepted = [0] * len(uni.sets)
    for w in itertools.product(range(1, n + 1), repeat=3):
        rows = _row_mask(uni.sets, lambda s: naive_alice_accept(s, w))
        rep.checks_run["triples"] += 1
        if not rows:
            continue
        cols = _col_mask(uni.trees, lambda t: naive_bob_accept(t, w))
        for i in nodes_of(rows):
            accepted[i - 1] |= cols
    for i, s in enumerate(uni.sets):
        if accepted[i] != uni.ones[i]:
            diff = accepted[i] ^ uni.ones[i]
            j = (diff & -diff).bit_length() - 1
            rep.violations.append(Violation("naive-mismatch", "-", str(s), uni.trees[j].to_text()))
        rep.checks_run["pairs"] += len(uni.trees)
    # witness_exists as a second oracle over every parsimonious rectangle
    has_witness = [
        _col_mask(uni.trees, lambda t: witness_exists(s, t)) for s in uni.sets
    ]
    for i, s in enumerate(uni.sets):
        if has_witness[i] != uni.ones[i]:
            rep.violations.append(Violation("witness-oracle-mismatch", "-", str(s), "-"))
    for c in iter_certificates(n):
        rows, cols = certificate_masks(n, c)
        for i in nodes_of(rows):
            bad = cols & ~has_witness[i - 1]
            if bad:
                j = (bad & -bad).bit_length() - 1
                rep.violations.append(
                    Violation("accepted-without-witness", c.to_text(), str(uni.sets[i - 1]),
                              uni.trees[j].to_text())
                )
    return rep.finish(started)


def check_combined(n: int, *, tie_break: str = "min", cap: int = 5) -> VerificationReport:
    """Combined protocol over cycle and nonnegativity rows versus the slack-matrix support."""
    from treecert.slack import build_support_matrix

    started = time.perf_counter()
    _check_cap(n, cap)
    m = build_support_matrix(n, include_nonneg=True, cap=cap)
    trees = m.col_index
    rep = VerificationReport("combined", n, "exhaustive", command=f"treecert verify --n {n} --include-nonneg")
    support = m.row_masks()
    covered = [0] * len(m.row_index)
    for cc in iter_combined_certificates(n):
        rows = _row_mask(m.row_index, lambda fa: combined_alice_accept(fa, cc))
        rep.checks_run["certificates"] += 1
        if not rows:
            continue
        cols = _col_mask(trees, lambda t: combined_bob_accept(t, cc))
        for i in nodes_of(rows):
            covered[i - 1] |= cols
            bad = cols & ~support[i - 1]
            if bad:
                j = (bad & -bad).bit_length() - 1
                rep.violations.append(
                    Violation("accepted-zero", cc.to_text(), str(m.row_index[i - 1]), trees[j].to_text())
                )
    for i, fa in enumerate(m.row_index):
        if covered[i] != support[i]:
            rep.violations.append(Violation("uncovered-one", "-", str(fa), "-"))
        for j, t in enumerate(trees):
            rep.checks_run["pairs"] += 1
            cc = combined_prover(fa, t, tie_break)
            if (cc is not None) != bool(m.entries[i, j]):
                rep.violations.append(Violation("prover-mismatch", str(cc), str(fa), t.to_text()))
            elif cc is not None and not (combined_alice_accept(fa, cc) and combined_bob_accept(t, cc)):
                rep.violations.append(Violation("rejected", cc.to_text(), str(fa), t.to_text()))
    return rep.finish(started)
