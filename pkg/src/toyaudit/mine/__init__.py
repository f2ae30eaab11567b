"""Profile-photo token mining against a prefix oracle, plus runtime estimation."""

from toyaudit.mine.estimate import InvalidParameter, RuntimeEstimate, estimate_runtime, humanize_seconds
from toyaudit.mine.miner import (
    MinerConfig,
    MiningResult,
    OracleAmbiguous,
    WorkerStream,
    mine_suffixes,
    partition_tokenspace,
    plan,
    run_attack,
    split_budget,
    sweep_prefixes,
)
from toyaudit.mine.permutation import IndexPermutation
from toyaudit.mine.tokenspace import DEFAULT_ALPHABET, TokenSpace

__all__ = [
    "DEFAULT_ALPHABET", "IndexPermutation", "InvalidParameter", "MinerConfig", "MiningResult",
    "OracleAmbiguous", "RuntimeEstimate", "TokenSpace", "WorkerStream", "estimate_runtime",
    "humanize_seconds", "mine_suffixes", "partition_tokenspace", "plan", "run_attack",
    "split_budget", "sweep_prefixes",
]
