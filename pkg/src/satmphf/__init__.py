"""Minimal perfect hash functions from SAT solving and from minimum-weight matchings."""

from .errors import *  # noqa: F401,F403
from .hashing import LiteralTable, derive_literal_table, fingerprint, hash_index, mix64
from .encoding import CnfFormula, emit_dimacs, encode_compact, encode_cubic, parse_dimacs
from .solver import SolveResult, SolverConfig, Status, solve
from .sat_mphf import SatMphf, alpha, build_sat_mphf, query_sat_mphf
from .matching import Matching, WeightedBipartiteGraph, min_weight_perfect_matching, optimal_k
from .xorsat import XorConstraint, XorsatFilter, build_filter, query_filter, solve_gf2
from .matching_mphf import (MatchingMphf, ShardedMphf, bits_per_key, build_matching_mphf,
                            build_sharded, matching_to_tuples, query_matching_mphf,
                            verify_bijection)
from .container import dumps, load, loads, save

__version__ = "0.1.0"
