"""Labeled trees on [n], Prüfer codes, path queries and the connectivity oracle.

Node labels are 1-based everywhere in the public interface.  Node sets are
stored as Python ints used as bitmasks (bit ``i - 1`` stands for node ``i``);
Python ints are unbounded, so the same representation serves n > 64 without a
separate code path, only slower.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from treecert.limits import MAX_ENUM_N, CapExceededError


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, elements: Iterable[int]):
        self.parent = {x: x for x in elements}
        self.size = {x: 1 for x in self.parent}

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the classes of ``a`` and ``b``; False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def mask_of(nodes: Iterable[int]) -> int:
    mask = 0
    for x in nodes:
        mask |= 1 << (int(x) - 1)
    return mask


def nodes_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return out


@dataclass(frozen=True, order=True)
class NodeSet:
    """A set S of nodes with 1 < |S| < n, i.e. an element of the row set."""

    n: int
    mask: int

    def __post_init__(self):
        if self.mask >> self.n:
            raise ValueError(f"node set {self.mask:#x} has labels outside 1..{self.n}")
        size = self.mask.bit_count()
        if size <= 1:
            raise ValueError("node set needs more than one member")
        if size >= self.n:
            raise ValueError("node set must be a proper subset of [n]")

    @classmethod
    def of(cls, n: int, members: Iterable[int]) -> "NodeSet":
        members = [int(x) for x in members]
        for x in members:
            if not 1 <= x <= n:
                raise ValueError(f"node {x} outside 1..{n}")
        return cls(n, mask_of(members))

    def __contains__(self, x: int) -> bool:
        return x >= 1 and (self.mask >> (x - 1)) & 1 == 1

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[int]:
        return iter(nodes_of(self.mask))

    @property
    def members(self) -> list[int]:
        return nodes_of(self.mask)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


def _normalize_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, init=False)
class Tree:
    """A labeled tree on nodes 1..n, stored as a set of edges ``(a, b)`` with a < b.

    Adjacency lists and a parent/depth table rooted at node 1 are computed
    lazily and cached; all path queries go through them.
    """

    n: int
    edges: frozenset

    def __init__(self, n: int, edges: Iterable[Sequence[int]], *, _trusted: bool = False):
        norm = frozenset(_normalize_edge(int(a), int(b)) for a, b in edges)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", norm)
        if not _trusted:
            self._validate()

    def _validate(self) -> None:
        n = self.n
        if n < 2:
            raise ValueError("a tree needs at least 2 nodes")
        if len(self.edges) != n - 1:
            raise ValueError(f"a tree on {n} nodes has {n - 1} edges, got {len(self.edges)}")
        dsu = DisjointSet(range(1, n + 1))
        for a, b in self.edges:
            if a == b or not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"invalid edge {a}-{b} for n={n}")
            if not dsu.union(a, b):
                raise ValueError(f"edge {a}-{b} closes a cycle")

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for nbrs in adj:
            nbrs.sort()
        return adj

    @cached_property
    def _rooted(self) -> tuple[list[int], list[int]]:
        parent = [0] * (self.n + 1)
        depth = [0] * (self.n + 1)
        adj = self.adjacency
        seen = [False] * (self.n + 1)
        seen[1] = True
        queue = deque([1])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    queue.append(y)
        return parent, depth

    @cached_property
    def _path_mask_cache(self) -> dict:
        return {}

    def has_edge(self, a: int, b: int) -> bool:
        return _normalize_edge(a, b) in self.edges

    def path_nodes(self, u: int, v: int) -> list[int]:
        """The unique u-v path, endpoints included, in order from u to v."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise ValueError("path query needs two distinct endpoints")
        parent, depth = self._rooted
        left, right = [u], [v]
        a, b = u, v
        while depth[a] > depth[b]:
            a = parent[a]
            left.append(a)
        while depth[b] > depth[a]:
            b = parent[b]
            right.append(b)
        while a != b:
            a, b = parent[a], parent[b]
            left.append(a)
            right.append(b)
        right.pop()  # LCA already on the left branch
        return left + right[::-1]

    def path_interior_mask(self, u: int, v: int) -> int:
        """Bitmask of the internal nodes of the u-v path (cached per pair)."""
        key = (u, v) if u < v else (v, u)
        cache = self._path_mask_cache
        mask = cache.get(key)
        if mask is None:
            mask = mask_of(self.path_nodes(u, v)[1:-1])
            cache[key] = mask
        return mask

    def is_on_path(self, u: int, x: int, v: int) -> bool:
        """True iff x lies on the u-v path; endpoints count."""
        self._check_node(x)
        if x == u or x == v:
            self._check_node(u)
            self._check_node(v)
            if u == v:
                raise ValueError("path query needs two distinct endpoints")
            return True
        return (self.path_interior_mask(u, v) >> (x - 1)) & 1 == 1

    def _check_node(self, x: int) -> None:
        if not 1 <= x <= self.n:
            raise ValueError(f"node {x} outside 1..{self.n}")

    def to_text(self) -> str:
        """Serialize as ``"n;u1-v1,u2-v2,..."`` with edges sorted."""
        return f"{self.n};" + ",".join(f"{a}-{b}" for a, b in sorted(self.edges))

    @classmethod
    def from_text(cls, text: str) -> "Tree":
        head, _, body = text.strip().partition(";")
        edges = []
        for item in filter(None, body.split(",")):
            a, b = item.split("-")
            edges.append((int(a), int(b)))
        return cls(int(head), edges)

    def __str__(self) -> str:
        return self.to_text()


def pruefer_decode(entries: Sequence[int], n: int | None = None) -> Tree:
    """Decode a Prüfer sequence of length n - 2 into its tree."""
    entries = [int(x) for x in entries]
    if n is None:
        n = len(entries) + 2
    if n < 2:
        raise ValueError("n must be at least 2")
    if len(entries) != n - 2:
        raise ValueError(f"Prüfer sequence for n={n} must have length {n - 2}, got {len(entries)}")
    degree = [1] * (n + 1)
    for x in entries:
        if not 1 <= x <= n:
            raise ValueError(f"Prüfer entry {x} outside 1..{n}")
        degree[x] += 1
    leaves = [x for x in range(1, n + 1) if degree[x] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in entries:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return Tree(n, edges, _trusted=True)


def pruefer_encode(tree: Tree) -> list[int]:
    n = tree.n
    degree = [len(nbrs) for nbrs in tree.adjacency]
    removed = [False] * (n + 1)
    leaves = [x for x in range(1, n + 1) if degree[x] == 1]
    heapq.heapify(leaves)
    adj = tree.adjacency
    out = []
    for _ in range(n - 2):
        leaf = heapq.heappop(leaves)
        removed[leaf] = True
        nbr = next(y for y in adj[leaf] if not removed[y])
        out.append(nbr)
        degree[nbr] -= 1
        if degree[nbr] == 1:
            heapq.heappush(leaves, nbr)
    return out


def enumerate_trees(n: int, *, cap: int = MAX_ENUM_N) -> Iterator[Tree]:
    """All n**(n-2) labeled trees, in lexicographic Prüfer order.

    The cap defaults to n <= 8 (262144 trees).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > cap:
        raise CapExceededError(f"tree enumeration capped at n={cap}, got n={n}")
    for seq in itertools.product(range(1, n + 1), repeat=n - 2):
        yield pruefer_decode(seq, n)


def enumerate_cut_sets(n: int) -> Iterator[NodeSet]:
    """All S with 1 < |S| < n, ordered by size, then lexicographically."""
    if n < 3:
        raise ValueError("no proper node sets with more than one member for n < 3")
    for k in range(2, n):
        for combo in itertools.combinations(range(1, n + 1), k):
            yield NodeSet(n, mask_of(combo))


def path_nodes(t: Tree, u: int, v: int) -> list[int]:
    return t.path_nodes(u, v)


def is_on_path(t: Tree, u: int, x: int, v: int) -> bool:
    return t.is_on_path(u, x, v)


def induced_components(t: Tree, s: NodeSet | int) -> int:
    """Number of connected components of the sub-forest of t induced by s."""
    mask = s.mask if isinstance(s, NodeSet) else s
    members = nodes_of(mask)
    dsu = DisjointSet(members)
    count = len(members)
    for a, b in t.edges:
        if (mask >> (a - 1)) & 1 and (mask >> (b - 1)) & 1 and dsu.union(a, b):
            count -= 1
    return count


def f_oracle(s: NodeSet, t: Tree) -> int:
    """1 if the forest induced by s in t is disconnected, else 0."""
    return 1 if induced_components(t, s) > 1 else 0


def random_pruefer(n: int, rng: np.random.Generator) -> list[int]:
    return rng.integers(1, n + 1, size=max(n - 2, 0)).tolist()


def random_tree(n: int, seed: int | np.random.Generator) -> Tree:
    """A uniformly random labeled tree (uniform Prüfer code), deterministic per seed."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return pruefer_decode(random_pruefer(n, rng), n)
