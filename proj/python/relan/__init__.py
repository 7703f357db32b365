"""Relational analogy matching over chess positions and Lean proof states."""

from ._core import (
    Network,
    RelanError,
    batch_match,
    brute_force_match,
    chess_network,
    derive_area,
    legal_move_count,
    match,
    normalize,
    parse_schema,
    proof_network,
    run_battery,
    run_cli,
    score,
    transfer_candidates,
    zscores,
)

__all__ = [
    "Network",
    "RelanError",
    "batch_match",
    "brute_force_match",
    "chess_network",
    "derive_area",
    "legal_move_count",
    "match",
    "normalize",
    "parse_schema",
    "proof_network",
    "run_battery",
    "run_cli",
    "score",
    "transfer_candidates",
    "zscores",
]
