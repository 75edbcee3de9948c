"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage or cap error.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from treecert import protocol as P
from treecert.limits import EXHAUSTIVE_CAP, EXHAUSTIVE_CAP_EXTENDED, MATRIX_CAP, CapExceededError
from treecert.slack import (
    build_support_matrix,
    exact_min_rectangle_cover,
    export_matrix,
    greedy_rectangle_cover,
)
from treecert.trees import NodeSet, Tree, f_oracle, random_tree
from treecert import verification as V

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COST_BOUND = 4.0
EXACT_COVER_MAX_N = 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 0
    mode: str = "exhaustive"
    samples: int = 100_000
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    include_nonneg: bool = False
    threads: int = 1
    triangle: bool = False
    tie_break: str = "min"
    extended: bool = False
    max_n: int = 64
    fixed: list[str] | None = None

    def validate(self) -> None:
        if self.command in ("verify", "trace", "export", "cover") and self.n < 3:
            raise UsageError(f"--n must be at least 3 (no proper node sets for n={self.n})")
        if self.command == "verify" and self.mode == "randomized" and self.samples <= 0:
            raise UsageError("--samples must be positive in randomized mode")
        if self.command == "cost-table" and self.max_n < 3:
            raise UsageError("--max-n must be at least 3")
        if self.threads < 0:
            raise UsageError("--threads must be >= 0")


def _emit(cfg: RunConfig, text: str) -> None:
    sys.stdout.write(text)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)


def cmd_verify(cfg: RunConfig) -> int:
    reports = []
    if cfg.mode == "exhaustive":
        cap = EXHAUSTIVE_CAP_EXTENDED if cfg.extended else EXHAUSTIVE_CAP
        if cfg.n > cap:
            hint = "" if cfg.extended else " (pass --extended for n=7)"
            raise CapExceededError(f"exhaustive mode is capped at n={cap}{hint}")
        progress = _progress_printer if cfg.extended else None
        reports.append(V.check_soundness(cfg.n, threads=cfg.threads, cap=cap, progress=progress))
        reports.append(V.check_completeness(cfg.n, tie_break=cfg.tie_break, threads=cfg.threads,
                                            cap=cap, progress=progress))
        if cfg.triangle:
            reports.append(V.check_triangle_lemma(cfg.n, mode="exhaustive", cap=cap))
        if cfg.include_nonneg:
            reports.append(V.check_combined(cfg.n, tie_break=cfg.tie_break))
    else:
        reports.append(V.check_soundness(cfg.n, "randomized", samples=cfg.samples, seed=cfg.seed))
        reports.append(V.check_completeness(cfg.n, "randomized", samples=cfg.samples, seed=cfg.seed,
                                            tie_break=cfg.tie_break))
        if cfg.triangle:
            reports.append(V.check_triangle_lemma(cfg.n, cfg.samples, cfg.seed))
    text = "\n".join(r.to_text() for r in reports)
    total = sum(len(r.violations) for r in reports)
    text += f"\ntotal violations: {total}\n"
    _emit(cfg, text)
    return EXIT_OK if total == 0 else EXIT_FAIL


def _progress_printer(done: int, total: int) -> None:
    print(f"  progress {done}/{total}", file=sys.stderr, flush=True)


def cost_rows_to_show(max_n: int) -> list[int]:
    shown = set(range(3, min(max_n, 32) + 1))
    k = 6
    while 2**k <= max_n:
        shown.update({2**k - 1, 2**k})
        k += 1
    shown.add(max_n)
    return sorted(x for x in shown if x <= max_n)


def max_cost_residual(max_n: int) -> tuple[float, int]:
    """Largest residual over every 3 <= n <= max_n, vectorized."""
    ns = np.arange(3, max_n + 1, dtype=np.int64)
    mant, expo = np.frexp(ns.astype(np.float64))
    floor_log = expo - 1
    size = (ns * (ns - 1) // 2) * 4 * (floor_log + 1)
    resid = np.log2(size.astype(np.float64)) - 2 * np.log2(ns) - np.log2(np.log2(ns))
    k = int(np.argmax(resid))
    return float(resid[k]), int(ns[k])


def cmd_cost_table(cfg: RunConfig) -> int:
    lines = [f"{'n':>9} {'|C|':>16} {'log2|C|':>12} {'2lg n+lglg n':>14} {'residual':>10}"]
    for n in cost_rows_to_show(cfg.max_n):
        size = P.certificate_space_size(n)
        lines.append(
            f"{n:>9} {size:>16} {math.log2(size):>12.6f} {P.cost_reference(n):>14.6f} {P.cost_residual(n):>10.6f}"
        )
    worst, at = max_cost_residual(cfg.max_n)
    ok = worst <= COST_BOUND + 1e-9
    lines.append(f"max residual: {worst:.6f} at n={at} (bound {COST_BOUND:g}): {'PASS' if ok else 'FAIL'}")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _parse_fixed(n: int, tokens: list[str]) -> tuple[NodeSet, Tree]:
    parts = {}
    for tok in tokens:
        key, _, val = tok.partition("=")
        parts[key.strip().upper()] = val
    if set(parts) != {"S", "T"}:
        raise UsageError("--fixed expects S=a,b,... T=a-b,c-d,...")
    try:
        s = NodeSet.of(n, (int(x) for x in parts["S"].split(",")))
        t = Tree.from_text(f"{n};{parts['T']}")
    except ValueError as exc:
        raise UsageError(f"bad --fixed instance: {exc}") from exc
    return s, t


def trace_text(s: NodeSet, t: Tree, tie_break: str = "min") -> str:
    n = s.n
    out = [f"n: {n}", f"S: {s}", f"T: {t.to_text()}", f"f(S,T): {f_oracle(s, t)}"]
    witnesses = list(P.iter_witnesses(s, t))
    out.append(f"witnesses (u<v): {len(witnesses)}")
    for w in witnesses:
        out.append(f"  ({w.u},{w.t},{w.v}) mu={P.mu(w)}")
    cert = P.prover_certificate(s, t, tie_break)
    if cert is None:
        out.append("Prover: no witness exists; any certificate is refuted")
        cert = next(c for c in P.iter_certificates(n) if c.u in s and c.v in s)
        out.append(f"Demonstration certificate: {cert.to_text()}")
    else:
        w = P.prover_witness(s, t, tie_break)
        out.append(f"Prover: valid witness ({w.u},{w.t},{w.v}) mu={P.mu(w)}")
        out.append(f"Certificate: {cert.to_text()}")
    cands = P.candidate_rs(cert, n)
    out.append(f"candidate r: {cands}")

    out.append("Alice:")
    alice = True
    if cert.u not in s or cert.v not in s:
        out.append(f"  step 3: u={cert.u} or v={cert.v} not in S -> Reject")
        alice = False
    else:
        out.append(f"  step 3: u={cert.u}, v={cert.v} in S")
        for r in cands:
            if r in s:
                out.append(f"  step 4: r={r} in S -> Reject")
                alice = False
                break
            out.append(f"  step 4: r={r} not in S")
        if alice:
            out.append("  step 5: Accept")

    out.append("Bob:")
    bob = False
    for r in cands:
        if t.is_on_path(cert.u, r, cert.v):
            out.append(f"  step 3: r={r} on path {t.path_nodes(cert.u, cert.v)} -> Accept")
            bob = True
            break
        out.append(f"  step 3: r={r} not on path {t.path_nodes(cert.u, cert.v)}")
    if not bob:
        out.append("  step 4: Reject")
    out.append(f"Alice: {'Accept' if alice else 'Reject'} / Bob: {'Accept' if bob else 'Reject'}")
    return "\n".join(out) + "\n"


def cmd_trace(cfg: RunConfig) -> int:
    if cfg.fixed:
        s, t = _parse_fixed(cfg.n, cfg.fixed)
    else:
        rng = np.random.default_rng(cfg.seed)
        t = random_tree(cfg.n, rng)
        s = V._random_set(cfg.n, rng)
    _emit(cfg, trace_text(s, t, cfg.tie_break))
    return EXIT_OK


def _matrix_cap(cfg: RunConfig) -> int:
    return EXHAUSTIVE_CAP_EXTENDED if cfg.extended else MATRIX_CAP


def cmd_export(cfg: RunConfig) -> int:
    m = build_support_matrix(cfg.n, cfg.include_nonneg, cap=_matrix_cap(cfg))
    data = export_matrix(m, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK


@dataclass
class _Rect:
    rows: list
    cols: list


def protocol_rectangles(n: int, include_nonneg: bool) -> list[_Rect]:
    """Nonempty rectangles of the (combined) protocol, in certificate order."""
    m = build_support_matrix(n, include_nonneg)
    trees = m.col_index
    rects = []
    certs = P.iter_combined_certificates(n) if include_nonneg else (P.Cyc(c) for c in P.iter_certificates(n))
    for cc in certs:
        rows = [fa for fa in m.row_index if P.combined_alice_accept(fa, cc)]
        if not rows:
            continue
        cols = [j for j, t in enumerate(trees) if P.combined_bob_accept(t, cc)]
        if cols:
            rects.append(_Rect(rows, cols))
    return rects


def cmd_cover(cfg: RunConfig) -> int:
    if cfg.n > MATRIX_CAP:
        raise CapExceededError(f"cover is capped at n={MATRIX_CAP}")
    m = build_support_matrix(cfg.n, cfg.include_nonneg)
    rects = protocol_rectangles(cfg.n, cfg.include_nonneg)
    greedy = greedy_rectangle_cover(m, rects)
    space = P.certificate_space_size(cfg.n) + (math.comb(cfg.n, 2) if cfg.include_nonneg else 0)
    lines = [f"n: {cfg.n}", f"rows: {m.shape[0]}", f"cols: {m.shape[1]}", f"ones: {m.ones()}"]
    if cfg.n <= EXACT_COVER_MAX_N:
        exact, _ = exact_min_rectangle_cover(m)
        lines.append(f"exact: {exact}")
    else:
        lines.append(f"exact: skipped (n > {EXACT_COVER_MAX_N})")
    lines += [
        f"protocol rectangles (nonempty): {len(rects)}",
        f"greedy: {greedy}",
        f"certificates: {space}",
    ]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "cost-table": cmd_cost_table,
    "trace": cmd_trace,
    "export": cmd_export,
    "cover": cmd_cover,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treecert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_required=True):
        p.add_argument("--n", type=int, required=n_required)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1, help="worker processes, 0 = one per CPU")

    p = sub.add_parser("verify", help="soundness and completeness sweeps")
    common(p)
    p.add_argument("--mode", choices=V.MODES, default="exhaustive")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--triangle", action="store_true")
    p.add_argument("--include-nonneg", action="store_true", help="also check the combined protocol")
    p.add_argument("--tie-break", choices=sorted(P.TIE_BREAKS), default="min")
    p.add_argument("--extended", action="store_true", help="allow exhaustive n=7")

    p = sub.add_parser("cost-table", help="certificate counts against 2 log n + log log n")
    common(p, n_required=False)
    p.add_argument("--max-n", type=int, default=64)

    p = sub.add_parser("trace", help="one protocol run, step by step")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed", nargs=2, metavar=("S=..", "T=.."))
    p.add_argument("--tie-break", choices=sorted(P.TIE_BREAKS), default="min")

    p = sub.add_parser("export", help="write the support matrix")
    common(p)
    p.add_argument("--format", dest="fmt", choices=("csv", "bin"), default="csv")
    p.add_argument("--include-nonneg", action="store_true")
    p.add_argument("--extended", action="store_true", help="allow n=7")

    p = sub.add_parser("cover", help="exact and protocol rectangle covers")
    common(p)
    p.add_argument("--include-nonneg", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if v is not None}
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (UsageError, CapExceededError) as exc:
        parser.print_usage(sys.stderr)
        print(f"treecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
