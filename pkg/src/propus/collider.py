"""Distinguished-point collision search for the three-way PAF match.

The matching space holds two families of points over the same codomain:

* ``f_ad(i, j)``: line i of the A bucket plus line j of the D bucket;
* ``f_b(k)``: ``lam - 2 * (line k of the B bucket)``.

A triple with ``f_ad(i, j) == f_b(k)`` is an SDS. Walks hop between points:
each point is serialized, hashed, and the digest picks the next step
(family and line indices). A walk ends at a distinguished digest (enough
leading zero bits) and only its seed, length and end digest are kept.
Two trails that end on the same digest are replayed to find where they
merged; a merge reached from one AD step and one B step is a golden
collision.
"""
from __future__ import annotations

import hashlib
import logging
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .sds import PropusQuadruple, SdsParams, propus_check, verify_sds
from .seqcore import ResidueSubset, paf_indicator_rows

log = logging.getLogger(__name__)

AD = "AD"
B = "B"

DIGEST_SIZE = 20
TRAIL_RECORD = struct.Struct("<QI20sH")


def _sha1(data: bytes) -> bytes:
    return hashlib.sha1(data).digest()


def _toy_digest(data: bytes) -> bytes:
    # 16 possible outputs; collides constantly, for exercising the useless-collision paths
    return bytes([0, hashlib.sha1(data).digest()[0] & 0x0F]) + bytes(DIGEST_SIZE - 2)


DIGESTS: dict[str, Callable[[bytes], bytes]] = {"sha1": _sha1, "toy": _toy_digest}


class StepRecord(NamedTuple):
    family: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class Trail:
    start_seed: int
    length: int
    end_digest: bytes
    worker_id: int = 0
    abandoned: bool = False
    version: int = 0

    def pack(self) -> bytes:
        return TRAIL_RECORD.pack(self.start_seed, self.length, self.end_digest, self.worker_id)

    @classmethod
    def unpack(cls, raw: bytes) -> Trail:
        seed, length, digest_, worker = TRAIL_RECORD.unpack(raw)
        return cls(seed, length, digest_, worker)


class CollisionPair(NamedTuple):
    stored: Trail
    incoming: Trail


@dataclass
class SearchConfig:
    lam: int
    dp_bits: int = 4
    max_walk_len: int | None = None
    time_limit: float | None = None
    worker_count: int = 1
    max_steps: int | None = None
    max_solutions: int = 1
    walks_per_task: int = 256
    walks_per_version: int | None = 1 << 14
    digest_name: str = "sha1"
    store_capacity: int | None = None

    def __post_init__(self):
        if self.dp_bits < 0 or self.dp_bits > 8 * DIGEST_SIZE:
            raise ValueError(f"dp_bits must be in 0..160, got {self.dp_bits}")
        if self.max_walk_len is None:
            self.max_walk_len = 20 * 2**self.dp_bits
        if self.max_walk_len < 1:
            raise ValueError("max_walk_len must be at least 1")
        if self.digest_name not in DIGESTS:
            raise ValueError(f"unknown digest {self.digest_name!r}")
        if self.walks_per_version is not None and self.walks_per_version < 1:
            raise ValueError("walks_per_version must be positive")


class ReplayDivergence(RuntimeError):
    """A replayed trail did not reproduce its stored end digest."""


class SolutionRejected(RuntimeError):
    """A golden collision whose subsets do not verify as an SDS."""


class BucketCorruption(ValueError):
    """A PAF line disagrees with the subset it is aligned with."""


def version_suffix(version: int) -> bytes:
    """Salt appended to serialized points; version 0 hashes the bare serialization."""
    return b"" if version == 0 else struct.pack("<I", version)


def serialize_point(point, v: int) -> bytes:
    """v as little-endian u16, then each entry as little-endian i16."""
    values = [int(x) for x in point]
    if not 0 <= v < 1 << 16:
        raise OverflowError(f"modulus {v} does not fit in 16 bits")
    for x in values:
        if not -(1 << 15) <= x < 1 << 15:
            raise OverflowError(f"walk point entry {x} does not fit in 16 bits")
    return struct.pack(f"<H{len(values)}h", v, *values)


def digest(point, v: int, digest_name: str = "sha1", version: int = 0) -> bytes:
    return DIGESTS[digest_name](serialize_point(point, v) + version_suffix(version))


def next_step(d: bytes, sizes: tuple[int, int, int]) -> StepRecord:
    """Family from the parity of bytes 0..7 (LE); indices from bytes 8..11 and 12..15."""
    n_a, n_d, n_b = sizes
    if int.from_bytes(d[0:8], "little") % 2 == 0:
        return StepRecord(AD, (int.from_bytes(d[8:12], "little") % n_a, int.from_bytes(d[12:16], "little") % n_d))
    return StepRecord(B, (int.from_bytes(d[8:12], "little") % n_b,))


def is_distinguished(d: bytes, dp_bits: int) -> bool:
    if not 0 <= dp_bits <= 8 * len(d):
        raise ValueError(f"dp_bits must be in 0..{8 * len(d)}")
    if dp_bits == 0:
        return True
    return int.from_bytes(d, "big") >> (8 * len(d) - dp_bits) == 0


def seed_digest(seed: int) -> bytes:
    return _sha1(int(seed).to_bytes(8, "little"))


class MatchInstance:
    """One bucket triple: the A, D and B PAF lines (and aligned subsets) plus lam."""

    AD_CACHE_LIMIT = 1 << 16

    def __init__(self, v, a_rows, d_rows, b_rows, lam, subsets=(None, None, None), label="", digest_name="sha1"):
        self.v = int(v)
        self.lam = int(lam)
        self.label = label
        self.digest_name = digest_name
        self.a = np.ascontiguousarray(a_rows, dtype="<i2")
        self.d = np.ascontiguousarray(d_rows, dtype="<i2")
        self.b = np.ascontiguousarray(b_rows, dtype="<i2")
        n = (self.v - 1) // 2
        for name, rows in (("A", self.a), ("D", self.d), ("B", self.b)):
            if rows.ndim != 2 or rows.shape[1] != n:
                raise ValueError(f"{name} lines must have {n} entries, got shape {rows.shape}")
        self.subsets_a, self.subsets_d, self.subsets_b = subsets
        self.sizes = (len(self.a), len(self.d), len(self.b))
        self._check_range()
        self._prefix = struct.pack("<H", self.v)
        self._hash = DIGESTS[digest_name]
        # Nonnegative rows (always the case for indicator PAFs) are packed as
        # Python ints with one 16-bit lane per entry: lane sums never carry,
        # so int addition + to_bytes is the i16 serialization, and is faster.
        self._nbytes = 2 * n
        self._lanes = not (len(self.a) and self.a.min() < 0) and not (len(self.d) and self.d.min() < 0)
        if self._lanes:
            self._ad_rows = [int.from_bytes(row.tobytes(), "little") for row in self.a]
            self._d_rows = [int.from_bytes(row.tobytes(), "little") for row in self.d]
        else:
            self._ad_rows = [row for row in self.a]
            self._d_rows = [row for row in self.d]
        self._b_vectors = [self.lam - 2 * row.astype(np.int64) for row in self.b]
        self._b_bytes = [self._prefix + vec.astype("<i2").tobytes() for vec in self._b_vectors]
        self.version = -1
        self.set_version(0)

    def set_version(self, version: int):
        """Switch the walk function; B digests and the AD digest cache depend on it."""
        if version == self.version:
            return
        self.version = version
        self._suffix = version_suffix(version)
        self._b_digests = [self._hash(bb + self._suffix) for bb in self._b_bytes]
        self._ad_cache = {} if len(self.a) * len(self.d) <= self.AD_CACHE_LIMIT else None

    def _check_range(self):
        hi = 1 << 15
        if len(self.a) and len(self.d) and int(self.a.max()) + int(self.d.max()) >= hi:
            raise OverflowError("f_ad values exceed 16 bits")
        if len(self.b) and abs(self.lam) + 2 * int(np.abs(self.b).max()) >= hi:
            raise OverflowError("f_b values exceed 16 bits")

    @property
    def empty(self) -> bool:
        return 0 in self.sizes

    def f_ad(self, i: int, j: int) -> tuple[int, ...]:
        if not (0 <= i < self.sizes[0] and 0 <= j < self.sizes[1]):
            raise IndexError(f"AD indices ({i}, {j}) out of range for sizes {self.sizes[:2]}")
        return tuple(int(x) for x in self.a[i].astype(np.int64) + self.d[j])

    def f_b(self, k: int) -> tuple[int, ...]:
        if not 0 <= k < self.sizes[2]:
            raise IndexError(f"B index {k} out of range for size {self.sizes[2]}")
        return tuple(int(x) for x in self._b_vectors[k])

    def point(self, step: StepRecord) -> tuple[int, ...]:
        return self.f_ad(*step.indices) if step.family == AD else self.f_b(*step.indices)

    def evaluate(self, step: StepRecord) -> tuple[bytes, bytes]:
        """Serialized point and its digest for a step."""
        if step.family == B:
            k = step.indices[0]
            return self._b_bytes[k], self._b_digests[k]
        i, j = step.indices
        raw = self._prefix + self._ad_bytes(i, j)
        return raw, self._hash(raw + self._suffix)

    def _ad_bytes(self, i: int, j: int) -> bytes:
        total = self._ad_rows[i] + self._d_rows[j]
        return total.to_bytes(self._nbytes, "little") if self._lanes else total.tobytes()

    # The walk loop is the hot path; it inlines next_step/is_distinguished.
    def walk(self, seed: int, dp_bits: int, max_len: int, worker_id: int = 0) -> Trail:
        n_a, n_d, n_b = self.sizes
        a_rows, d_rows = self._ad_rows, self._d_rows
        b_digests = self._b_digests
        prefix, suffix, hash_ = self._prefix, self._suffix, self._hash
        version = self.version
        cache = self._ad_cache
        lanes, nbytes = self._lanes, self._nbytes
        shift = 8 * DIGEST_SIZE - dp_bits
        frm = int.from_bytes
        d = seed_digest(seed)
        length = 0
        while True:
            if d[0] & 1:
                d = b_digests[frm(d[8:12], "little") % n_b]
            else:
                i = frm(d[8:12], "little") % n_a
                j = frm(d[12:16], "little") % n_d
                key = i * n_d + j
                got = None if cache is None else cache.get(key)
                if got is None:
                    total = a_rows[i] + d_rows[j]
                    got = hash_(prefix + (total.to_bytes(nbytes, "little") if lanes else total.tobytes()) + suffix)
                    if cache is not None:
                        cache[key] = got
                d = got
            length += 1
            if frm(d, "big") >> shift == 0:
                return Trail(seed, length, d, worker_id, version=version)
            if length >= max_len:
                return Trail(seed, length, d, worker_id, abandoned=True, version=version)

    def replay(self, seed: int, length: int) -> Iterator[tuple[StepRecord, bytes, bytes]]:
        """Yield ``(step, serialized point, digest)`` for the first ``length`` steps of a walk."""
        d = seed_digest(seed)
        for _ in range(length):
            step = next_step(d, self.sizes)
            raw, d = self.evaluate(step)
            yield step, raw, d

    def verify_alignment(self):
        """Recompute each bucket's PAF lines from its subsets; raise on the first mismatch."""
        for name, rows, elements in (("A", self.a, self.subsets_a), ("D", self.d, self.subsets_d), ("B", self.b, self.subsets_b)):
            if elements is None:
                continue
            elements = _element_rows(elements, self.v)
            if len(elements) != len(rows):
                raise BucketCorruption(f"{name} bucket: {len(elements)} subsets vs {len(rows)} PAF lines")
            ind = np.zeros((len(elements), self.v), dtype=np.int16)
            if elements.shape[1]:
                np.put_along_axis(ind, elements, 1, axis=1)
            bad = np.flatnonzero(np.any(paf_indicator_rows(ind) != rows, axis=1))
            if len(bad):
                idx = int(bad[0])
                X = ResidueSubset(self.v, tuple(int(e) for e in elements[idx]))
                raise BucketCorruption(f"{name} bucket line {idx}: PAF line does not match subset {X}")

    def subset(self, which: str, idx: int) -> ResidueSubset:
        source = {"A": self.subsets_a, "D": self.subsets_d, "B": self.subsets_b}[which]
        if source is None:
            raise SolutionRejected(f"no subsets aligned with the {which} bucket")
        X = source[idx]
        if isinstance(X, ResidueSubset):
            return X
        return ResidueSubset(self.v, tuple(int(e) for e in X))


def _element_rows(elements, v) -> np.ndarray:
    if isinstance(elements, np.ndarray):
        return elements.astype(np.int64, copy=False)
    k = elements[0].k if len(elements) else 0
    return np.array([X.elements for X in elements], dtype=np.int64).reshape(len(elements), k)


def run_walk(seed: int, config: SearchConfig, instance: MatchInstance, worker_id: int = 0) -> Trail:
    if instance.empty:
        raise ValueError("cannot walk on an empty bucket")
    return instance.walk(seed, config.dp_bits, config.max_walk_len, worker_id)


class TrailStore:
    """Map from end digest to the first trail that reached it.

    With a ``path``, every stored trail is also appended to a fixed-width
    binary record file.
    """

    def __init__(self, capacity: int | None = None, path=None, resume: bool = False):
        self.capacity = capacity
        self._trails: OrderedDict[bytes, Trail] = OrderedDict()
        self.path = Path(path) if path is not None else None
        self._fh = None
        self.collisions = 0
        self.evictions = 0
        if self.path is not None:
            if resume and self.path.exists():
                for t in read_trail_file(self.path):
                    self._trails[t.end_digest] = t
            self._fh = open(self.path, "ab" if resume else "wb")

    def __len__(self):
        return len(self._trails)

    def __contains__(self, end_digest):
        return end_digest in self._trails

    def get(self, end_digest) -> Trail | None:
        return self._trails.get(end_digest)

    def insert(self, t: Trail) -> CollisionPair | None:
        if t.abandoned:
            return None
        prior = self._trails.get(t.end_digest)
        if prior is not None:
            if prior.start_seed == t.start_seed:
                return None
            self.collisions += 1
            return CollisionPair(prior, t)
        if self.capacity is not None and len(self._trails) >= self.capacity:
            self._trails.popitem(last=False)
            self.evictions += 1
            if self.evictions == 1 or self.evictions % 100000 == 0:
                log.warning("trail store full (%d); evicting oldest trails (%d so far)", self.capacity, self.evictions)
        self._trails[t.end_digest] = t
        if self._fh is not None:
            self._fh.write(t.pack())
        return None

    def flush(self):
        if self._fh is not None:
            self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_trail_file(path) -> list[Trail]:
    data = Path(path).read_bytes()
    size = TRAIL_RECORD.size
    if len(data) % size:
        raise ValueError(f"{path}: length {len(data)} is not a multiple of {size}")
    return [Trail.unpack(data[o : o + size]) for o in range(0, len(data), size)]


@dataclass
class Resolution:
    """Outcome of replaying a collision pair."""

    solution: tuple[int, int, int] | None
    reason: str
    merge_steps: tuple[StepRecord, StepRecord] | None = None
    replay_steps: int = 0


def resolve_collision(pair: CollisionPair, config: SearchConfig, instance: MatchInstance) -> Resolution:
    t1, t2 = pair
    if t1.version != t2.version:
        raise ValueError("trails from different walk-function versions cannot collide")
    instance.set_version(t1.version)
    walks = []
    for t in (t1, t2):
        path = list(instance.replay(t.start_seed, t.length))
        if not path or path[-1][2] != t.end_digest:
            raise ReplayDivergence(
                f"trail from seed {t.start_seed} (length {t.length}) did not replay to its end digest"
            )
        walks.append(path)
    long_, short = sorted(walks, key=len, reverse=True)
    offset = len(long_) - len(short)
    replayed = len(long_) + len(short)
    for pos in range(len(short)):
        s_long, raw_long, d_long = long_[offset + pos]
        s_short, raw_short, d_short = short[pos]
        if d_long != d_short:
            continue
        steps = (s_long, s_short)
        if s_long == s_short:
            return Resolution(None, "same-step", steps, replayed)
        if raw_long != raw_short:
            return Resolution(None, "digest-collision", steps, replayed)
        if s_long.family == s_short.family:
            return Resolution(None, "same-family", steps, replayed)
        ad, bb = (s_long, s_short) if s_long.family == AD else (s_short, s_long)
        return Resolution((ad.indices[0], ad.indices[1], bb.indices[0]), "golden", steps, replayed)
    raise ReplayDivergence("trails share an end digest but never merge")


def extract_solution(i: int, j: int, k: int, instance: MatchInstance) -> PropusQuadruple:
    """Look up the aligned subsets and re-verify them as a propus SDS."""
    A = instance.subset("A", i)
    D = instance.subset("D", j)
    Bk = instance.subset("B", k)
    q = PropusQuadruple(instance.v, A, Bk, Bk, D)
    params = SdsParams(instance.v, (A.k, Bk.k, Bk.k, D.k), instance.lam)
    if not propus_check(q):
        raise SolutionRejected(f"A={A} is not symmetric")
    if not verify_sds(q.blocks, params):
        raise SolutionRejected(f"lines ({i}, {j}, {k}) do not form a {params} SDS: A={A} D={D} B={Bk}")
    return q


@dataclass
class WalkStats:
    walks: int = 0
    steps: int = 0
    abandoned: int = 0
    collisions: int = 0
    useless: dict = field(default_factory=dict)
