"""Nondeterministic certificate protocols for the spanning tree slack matrix."""

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
    cost_bits,
    encode_certificate,
    is_witness,
    mu,
    prover_certificate,
    witness_exists,
)
from treecert.trees import (
    NodeSet,
    Tree,
    enumerate_cut_sets,
    enumerate_trees,
    f_oracle,
    induced_components,
    pruefer_decode,
    pruefer_encode,
    random_tree,
)

__version__ = "0.1.0"
