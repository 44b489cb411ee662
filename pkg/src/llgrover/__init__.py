"""Grover-assisted proof search for the {⊗, ⊸} fragment of linear logic."""
from .classical import NotProvable, match_atom_pairs, prove_bruteforce
from .pairdb import prove_pairdb, recover_permutation
from .qsim import SeededRng
from .seqcalc import check_proof, parse_sequent, render_proof
from .splitsearch import prove_splitsearch

__all__ = [
    "NotProvable", "SeededRng", "check_proof", "match_atom_pairs", "parse_sequent",
    "prove_bruteforce", "prove_pairdb", "prove_splitsearch", "recover_permutation",
    "render_proof",
]
__version__ = "0.1.0"
