"""Search orchestration: walkers, the trail store and the resolver.

Two schedules share the same dispatch order. Work is cut into tasks of
``walks_per_task`` consecutive seeds, handed to bucket triples round-robin,
with seeds numbered globally from ``seed_base``.

* ``run_deterministic``: one thread, task results consumed in dispatch order,
  every collision resolved immediately. Byte-reproducible.
* ``run_parallel``: ``worker_count`` walker processes, the store in the
  calling process, and one resolver process.
"""
from __future__ import annotations

import hashlib
import logging
import multiprocessing
import struct
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path

from .candgen import Bucket, bucket_triples
from .collider import (
    CollisionPair,
    MatchInstance,
    SearchConfig,
    SolutionRejected,
    TrailStore,
    WalkStats,
    extract_solution,
    resolve_collision,
)
from .sds import PropusQuadruple

log = logging.getLogger(__name__)


@dataclass
class Solution:
    triple: int
    indices: tuple[int, int, int]
    quadruple: PropusQuadruple


@dataclass
class SearchResult:
    solutions: list[Solution] = field(default_factory=list)
    stats: WalkStats = field(default_factory=WalkStats)
    elapsed: float = 0.0
    stopped_by: str = ""
    rejected: list[str] = field(default_factory=list)


def load_instance(a: Bucket, d: Bucket, b: Bucket, lam: int, digest_name="sha1", verify=True, cache=None) -> MatchInstance:
    loaded = []
    for bucket in (a, d, b):
        key = (str(bucket.path), str(bucket.subset_path))
        if cache is not None and key in cache:
            loaded.append(cache[key])
            continue
        item = bucket.load()
        if cache is not None:
            cache[key] = item
        loaded.append(item)
    (va, sa, ra), (vd, sd, rd), (vb, sb, rb) = loaded
    if not va == vd == vb:
        raise ValueError(f"bucket moduli differ: {va}, {vd}, {vb}")
    label = f"A.lead{a.lead} D.lead{d.lead} B.lead{b.lead}"
    inst = MatchInstance(va, ra, rd, rb, lam, (sa, sd, sb), label=label, digest_name=digest_name)
    if verify:
        inst.verify_alignment()
    return inst


def instances_from_buckets(buckets_a, buckets_d, buckets_b, lam, digest_name="sha1"):
    """Load every lambda-compatible, nonempty bucket triple (each file read once)."""
    cache: dict = {}
    out = []
    for a, d, b in bucket_triples(buckets_a, buckets_d, buckets_b, lam):
        if 0 in (a.count, d.count, b.count):
            continue
        out.append(load_instance(a, d, b, lam, digest_name, cache=cache))
    return out


def version_salt(seed_base: int, index: int) -> int:
    """32-bit walk-function salt for the index-th version of a run."""
    raw = hashlib.sha1(b"propus-version" + struct.pack("<qI", seed_base, index)).digest()
    return int.from_bytes(raw[:4], "little") or 1


def _schedule(n_triples: int, walks: int, seed_base: int, walks_per_version=None):
    """Endless round-robin of (triple, version salt, first seed, count) tasks.

    Without ``walks_per_version`` every walk uses the unsalted function.
    """
    seed = seed_base
    dispatched = [0] * n_triples
    while True:
        for t in range(n_triples):
            version = version_salt(seed_base, dispatched[t] // walks_per_version) if walks_per_version else 0
            yield t, version, seed, walks
            seed += walks
            dispatched[t] += walks


def _walk_task(instance: MatchInstance, config: SearchConfig, version: int, seed: int, count: int, worker_id: int):
    instance.set_version(version)
    trails = []
    steps = 0
    for s in range(seed, seed + count):
        t = instance.walk(s, config.dp_bits, config.max_walk_len, worker_id)
        steps += t.length
        trails.append(t)
    return trails, steps


class _Engine:
    """Store + resolution bookkeeping shared by both schedules."""

    def __init__(self, instances, config: SearchConfig, store_dir=None):
        self.instances = instances
        self.config = config
        self.result = SearchResult()
        self.found: set[tuple[int, tuple[int, int, int]]] = set()
        self.store_dir = None if store_dir is None else Path(store_dir)
        if self.store_dir is not None:
            self.store_dir.mkdir(parents=True, exist_ok=True)
        self.stores: list[TrailStore | None] = [None] * len(instances)
        self.versions: list[int | None] = [None] * len(instances)
        self.retired = [set() for _ in instances]

    def _new_store(self, t_idx, version):
        path = None
        if self.store_dir is not None:
            path = self.store_dir / f"triple{t_idx:03d}.{version:08x}.trails"
        return TrailStore(self.config.store_capacity, path=path)

    def absorb(self, t_idx, version, trails, steps) -> list[CollisionPair]:
        st = self.result.stats
        st.steps += steps
        if version in self.retired[t_idx]:
            # late results from a retired walk function
            st.walks += len(trails)
            return []
        if version != self.versions[t_idx]:
            if self.stores[t_idx] is not None:
                self.retired[t_idx].add(self.versions[t_idx])
                self.stores[t_idx].close()
            self.stores[t_idx] = self._new_store(t_idx, version)
            self.versions[t_idx] = version
        pairs = []
        store = self.stores[t_idx]
        for tr in trails:
            st.walks += 1
            if tr.abandoned:
                st.abandoned += 1
                continue
            pair = store.insert(tr)
            if pair is not None:
                st.collisions += 1
                pairs.append(pair)
        return pairs

    def accept(self, t_idx, resolution):
        st = self.result.stats
        if resolution.solution is None:
            st.useless[resolution.reason] = st.useless.get(resolution.reason, 0) + 1
            return
        key = (t_idx, resolution.solution)
        if key in self.found:
            st.useless["repeat"] = st.useless.get("repeat", 0) + 1
            return
        self.found.add(key)
        try:
            q = extract_solution(*resolution.solution, self.instances[t_idx])
        except SolutionRejected as exc:
            log.error("rejected collision in %s: %s", self.instances[t_idx].label, exc)
            self.result.rejected.append(str(exc))
            return
        self.result.solutions.append(Solution(t_idx, resolution.solution, q))
        log.info("solution %s in %s", resolution.solution, self.instances[t_idx].label)

    def done(self, started) -> str:
        cfg = self.config
        if len(self.result.solutions) >= cfg.max_solutions:
            return "solutions"
        if cfg.max_steps is not None and self.result.stats.steps >= cfg.max_steps:
            return "steps"
        if cfg.time_limit is not None and time.monotonic() - started >= cfg.time_limit:
            return "time"
        return ""

    def close(self):
        for s in self.stores:
            if s is not None:
                s.close()


def run_deterministic(instances, config: SearchConfig, seed_base: int = 0, store_dir=None, on_solution=None) -> SearchResult:
    started = time.monotonic()
    eng = _Engine(instances, config, store_dir)
    res = eng.result
    if not instances:
        res.stopped_by = "empty"
        return res
    try:
        tasks = _schedule(len(instances), config.walks_per_task, seed_base, config.walks_per_version)
        for t_idx, version, seed, count in tasks:
            inst = instances[t_idx]
            trails, steps = _walk_task(inst, config, version, seed, count, 0)
            for pair in eng.absorb(t_idx, version, trails, steps):
                before = len(res.solutions)
                eng.accept(t_idx, resolve_collision(pair, config, inst))
                if on_solution is not None and len(res.solutions) > before:
                    on_solution(res.solutions[-1])
                if len(res.solutions) >= config.max_solutions:
                    break
            res.stopped_by = eng.done(started)
            if res.stopped_by:
                break
    finally:
        eng.close()
    res.elapsed = time.monotonic() - started
    return res


# Per-process state for pool workers.
_POOL_STATE: dict = {}


def _pool_init(instances, config):
    _POOL_STATE["instances"] = instances
    _POOL_STATE["config"] = config
    ident = multiprocessing.current_process()._identity
    _POOL_STATE["worker_id"] = ident[0] if ident else 0


def _pool_walk(t_idx, version, seed, count):
    inst = _POOL_STATE["instances"][t_idx]
    trails, steps = _walk_task(inst, _POOL_STATE["config"], version, seed, count, _POOL_STATE["worker_id"])
    return t_idx, version, trails, steps


def _pool_resolve(t_idx, pair):
    inst = _POOL_STATE["instances"][t_idx]
    return t_idx, resolve_collision(pair, _POOL_STATE["config"], inst)


def run_parallel(instances, config: SearchConfig, seed_base: int = 0, store_dir=None, on_solution=None) -> SearchResult:
    if config.worker_count <= 1:
        return run_deterministic(instances, config, seed_base, store_dir, on_solution)
    started = time.monotonic()
    eng = _Engine(instances, config, store_dir)
    res = eng.result
    if not instances:
        res.stopped_by = "empty"
        return res
    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
    init = (_pool_init, (instances, config))
    schedule = _schedule(len(instances), config.walks_per_task, seed_base, config.walks_per_version)
    in_flight = 2 * config.worker_count
    with ProcessPoolExecutor(config.worker_count, mp_context=ctx, initializer=init[0], initargs=init[1]) as walkers, \
            ProcessPoolExecutor(1, mp_context=ctx, initializer=init[0], initargs=init[1]) as resolver:
        walk_futs = {walkers.submit(_pool_walk, *next(schedule)) for _ in range(in_flight)}
        resolve_futs = set()
        try:
            while True:
                finished, _ = wait(walk_futs | resolve_futs, timeout=1.0, return_when=FIRST_COMPLETED)
                for fut in finished:
                    if fut in walk_futs:
                        walk_futs.discard(fut)
                        t_idx, version, trails, steps = fut.result()
                        for pair in eng.absorb(t_idx, version, trails, steps):
                            resolve_futs.add(resolver.submit(_pool_resolve, t_idx, pair))
                    else:
                        resolve_futs.discard(fut)
                        before = len(res.solutions)
                        eng.accept(*fut.result())
                        if on_solution is not None and len(res.solutions) > before:
                            on_solution(res.solutions[-1])
                res.stopped_by = eng.done(started)
                if res.stopped_by:
                    break
                # keep the resolver from falling arbitrarily far behind
                if len(resolve_futs) < 64 * config.worker_count:
                    while len(walk_futs) < in_flight:
                        walk_futs.add(walkers.submit(_pool_walk, *next(schedule)))
        finally:
            for fut in walk_futs | resolve_futs:
                fut.cancel()
            eng.close()
    res.elapsed = time.monotonic() - started
    return res
