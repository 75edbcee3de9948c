import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treecert.protocol import (
    Certificate,
    CycleFacet,
    Cyc,
    Nng,
    NonnegFacet,
    Witness,
    alice_accept,
    bob_accept,
    candidate_rs,
    certificate_space_size,
    combined_alice_accept,
    combined_bob_accept,
    combined_from_text,
    cost_bits,
    cost_residual,
    encode_certificate,
    floor_log2,
    is_witness,
    iter_certificates,
    mu,
    naive_alice_accept,
    naive_bob_accept,
    prover_certificate,
    prover_witness,
    range_split,
    witness_exists,
)
from treecert.trees import NodeSet, Tree, enumerate_cut_sets, enumerate_trees, f_oracle, random_tree


def brute_candidates(c, n):
    return [r for r in range(1, n + 1) if r not in (c.u, c.v) and encode_certificate(c.u, r, c.v) == c]


def brute_valid_witnesses(s, t):
    n = s.n
    found = [
        (u, x, v)
        for u, x, v in itertools.product(range(1, n + 1), repeat=3)
        if u < v and is_witness(s, t, (u, x, v))
    ]
    if not found:
        return []
    best = min(mu(w) for w in found)
    return sorted(w for w in found if mu(w) == best)


def test_witness_examples(star3, path4):
    assert is_witness(NodeSet.of(4, [1, 2]), star3, Witness(1, 3, 2))
    assert not is_witness(NodeSet.of(4, [1, 2, 3]), star3, Witness(1, 3, 2))
    assert not is_witness(NodeSet.of(4, [1, 2]), path4, Witness(1, 3, 2))
    assert not is_witness(NodeSet.of(4, [1, 2]), path4, (1, 1, 2))
    assert not is_witness(NodeSet.of(4, [1, 2]), path4, (1, 3, 1))


def test_witness_type_invariants():
    with pytest.raises(ValueError):
        Witness(1, 1, 2)
    assert Witness.canonical(3, 1, 2) == Witness(2, 1, 3)


def test_witness_exists_examples(star3, path4):
    assert witness_exists(NodeSet.of(4, [1, 3]), path4)
    assert witness_exists(NodeSet.of(4, [1, 2]), star3)
    assert not witness_exists(NodeSet.of(4, [1, 2]), path4)


def test_mu_examples():
    assert mu(Witness(1, 3, 2)) == 3
    assert mu(Witness(1, 2, 3)) == 2
    assert mu((4, 1, 7)) == mu((7, 1, 4))


def test_range_split_examples():
    ru, rv = range_split(1, 2, 4)
    assert list(ru) == [1] and list(rv) == [2, 3, 4]
    ru, rv = range_split(2, 4, 5)
    assert list(ru) == [1, 2, 3] and list(rv) == [4, 5]
    with pytest.raises(ValueError):
        range_split(3, 3, 5)


@pytest.mark.parametrize("n", range(3, 12))
def test_range_split_partitions(n):
    for u, v in itertools.combinations(range(1, n + 1), 2):
        ru, rv = range_split(u, v, n)
        assert sorted([*ru, *rv]) == list(range(1, n + 1))
        assert u in ru and v in rv
        for j in ru:
            assert abs(j - u) <= abs(j - v)
        for j in rv:
            assert abs(j - v) < abs(j - u)


def test_encode_examples():
    assert encode_certificate(1, 3, 2) == Certificate(1, 2, 1, 0, 0)
    assert encode_certificate(2, 1, 4) == Certificate(2, 4, 0, 1, 0)
    assert encode_certificate(2, 7, 4) == Certificate(2, 4, 1, 0, 1)


@pytest.mark.parametrize("u, t, v", [(1, 1, 2), (1, 2, 2), (3, 1, 2)])
def test_encode_errors(u, t, v):
    with pytest.raises(ValueError):
        encode_certificate(u, t, v)


def test_midpoint_tie_goes_to_u():
    # (2 + 4) / 2 = 3 is equally close to both ends
    c = encode_certificate(2, 3, 4)
    assert c.pi == 0 and c.delta == 0 and c.d == 0


def test_candidate_examples():
    assert candidate_rs(Certificate(1, 2, 1, 0, 0), 4) == [3]
    assert candidate_rs(Certificate(2, 4, 1, 0, 1), 8) == [6, 7]
    assert candidate_rs(Certificate(1, 2, 0, 0, 0), 4) == []


@pytest.mark.parametrize("n", range(3, 11))
def test_candidates_match_brute_force_exhaustively(n):
    for c in iter_certificates(n):
        cands = candidate_rs(c, n)
        assert cands == brute_candidates(c, n)
        assert len(cands) <= 2**c.d


@given(st.integers(3, 64).flatmap(lambda n: st.tuples(st.just(n), st.permutations(range(1, n + 1)))))
@settings(max_examples=300, deadline=None)
def test_certificate_roundtrip(args):
    n, perm = args
    u, x, v = perm[:3]
    u, v = min(u, v), max(u, v)
    c = encode_certificate(u, x, v)
    assert c.fits(n)
    assert x in candidate_rs(c, n)
    for r in candidate_rs(c, n):
        assert encode_certificate(u, r, v) == c


@given(st.integers(3, 2000), st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None)
def test_candidate_bound_random(n, seed):
    rng = np.random.default_rng(seed)
    u, v = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False).tolist())
    c = Certificate(u, v, int(rng.integers(2)), int(rng.integers(2)), int(rng.integers(floor_log2(n) + 1)))
    cands = candidate_rs(c, n)
    assert len(cands) <= 2**c.d
    assert all(encode_certificate(u, r, v) == c for r in cands)


def test_alice_examples():
    c = Certificate(1, 2, 1, 0, 0)
    assert alice_accept(NodeSet.of(4, [1, 2]), c)
    assert not alice_accept(NodeSet.of(4, [1, 3]), c)
    assert not alice_accept(NodeSet.of(4, [1, 2, 3]), c)


def test_bob_examples(star3, path4):
    c = Certificate(1, 2, 1, 0, 0)
    assert bob_accept(star3, c)
    assert not bob_accept(path4, c)
    assert not bob_accept(star3, Certificate(1, 2, 0, 0, 0))


def test_prover_examples(star3, path4):
    assert prover_certificate(NodeSet.of(4, [1, 2]), star3) == Certificate(1, 2, 1, 0, 0)
    assert prover_certificate(NodeSet.of(4, [1, 3]), path4) == Certificate(1, 3, 0, 0, 0)
    assert prover_certificate(NodeSet.of(4, [1, 2]), path4) is None


@pytest.mark.parametrize("n", [4, 5])
def test_prover_matches_brute_force(n):
    for t in enumerate_trees(n):
        for s in enumerate_cut_sets(n):
            valid = brute_valid_witnesses(s, t)
            lo, hi = prover_witness(s, t, "min"), prover_witness(s, t, "max")
            if not valid:
                assert lo is None and hi is None
            else:
                assert lo.as_tuple() == valid[0] and hi.as_tuple() == valid[-1]


def test_naive_examples(path4):
    s = NodeSet.of(4, [1, 2])
    assert naive_alice_accept(s, (1, 3, 2))
    assert naive_bob_accept(path4, (1, 3, 4))


@pytest.mark.parametrize("n", range(3, 6))
def test_naive_joint_acceptance_is_witness(n):
    for t in enumerate_trees(n):
        for s in enumerate_cut_sets(n):
            for w in itertools.product(range(1, n + 1), repeat=3):
                joint = naive_alice_accept(s, w) and naive_bob_accept(t, w)
                assert joint == is_witness(s, t, w)
                assert is_witness(s, t, w) == is_witness(s, t, (w[2], w[1], w[0]))


def test_certificate_space_examples():
    assert certificate_space_size(8) == 448
    assert certificate_space_size(7) == 252
    assert certificate_space_size(4) == 72
    assert cost_bits(8) == pytest.approx(8.807354922, abs=1e-9)


@pytest.mark.parametrize("n", range(3, 40))
def test_certificate_space_matches_enumeration(n):
    certs = list(iter_certificates(n))
    assert len(certs) == len(set(certs)) == certificate_space_size(n)
    assert certs == sorted(certs)


def test_cost_residual_bounded_sample():
    for n in [3, 4, 5, 16, 17, 1000, 2**20 - 1, 2**20]:
        assert cost_residual(n) <= 4


def test_certificate_text_forms():
    c = Certificate(1, 2, 1, 0, 0)
    assert c.to_text() == "1,2,1,0,0"
    assert Certificate.from_text("1,2,1,0,0") == c
    assert Cyc(c).to_text() == "C:1,2,1,0,0"
    assert Nng((3, 1)).to_text() == "N:1-3"
    assert combined_from_text("N:1-3") == Nng((1, 3))
    assert combined_from_text("C:1,2,1,0,0") == Cyc(c)


def test_certificate_invariants():
    with pytest.raises(ValueError):
        Certificate(2, 1, 0, 0, 0)
    with pytest.raises(ValueError):
        Certificate(1, 2, 2, 0, 0)
    assert not Certificate(1, 2, 0, 0, 3).fits(7)


def test_combined_examples(star1, path4):
    e12 = NonnegFacet((1, 2))
    assert combined_alice_accept(e12, Nng((1, 2))) and combined_bob_accept(star1, Nng((1, 2)))
    assert not combined_alice_accept(e12, Nng((1, 3)))
    cyc = CycleFacet(NodeSet.of(4, [1, 3]))
    assert not combined_alice_accept(cyc, Nng((1, 3)))
    assert not combined_alice_accept(e12, Cyc(Certificate(1, 2, 1, 0, 0)))
    c = prover_certificate(cyc.s, path4)
    assert combined_alice_accept(cyc, Cyc(c)) and combined_bob_accept(path4, Cyc(c))


@pytest.mark.parametrize("n, samples", [(50, 150), (200, 15)])
def test_completeness_random_large(n, samples):
    rng = np.random.default_rng(n)
    for _ in range(samples):
        t = random_tree(n, rng)
        keep = rng.integers(2, size=n)
        keep[:2] = 1
        keep[-1] = 0
        s = NodeSet.of(n, (i + 1 for i in np.flatnonzero(keep)))
        c = prover_certificate(s, t)
        assert (c is not None) == bool(f_oracle(s, t))
        if c is not None:
            assert alice_accept(s, c) and bob_accept(t, c)
