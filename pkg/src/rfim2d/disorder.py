"""Quenched Gaussian external fields with counter-based seeding.

Each interior vertex of a region gets an independent standard normal h_v.
The value at a vertex is a pure function of (master seed, replica, purpose,
vertex index): a SplitMix64-style hash of the key and the vertex counter is
mapped through the normal inverse CDF.  Any single vertex is therefore
recomputable without generating the rest of the lattice, and distinct
derivation paths give independent streams.

The disorder strength eps is *not* stored with the field; it is applied at
energy-evaluation time so one field sample can be swept over many eps values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .lattice import Region


@dataclass(frozen=True)
class Seed:
    """64-bit master seed plus a derivation path (replica index, purpose tag)."""

    master: int
    replica: int = 0
    purpose: str = "field"

    def __post_init__(self):
        if not 0 <= int(self.master) < 2 ** 64:
            raise ValueError("master seed must fit in 64 bits")
        if self.replica < 0:
            raise ValueError("replica index must be >= 0")

    def with_replica(self, replica: int) -> "Seed":
        return Seed(self.master, replica, self.purpose)

    def derived(self, purpose: str, extra: int = 0) -> "Seed":
        return Seed(self.master, self.replica * 1_000_003 + extra, purpose)

    def key64(self) -> int:
        digest = hashlib.sha256(
            f"{self.master}:{self.replica}:{self.purpose}".encode()
        ).digest()
        return int.from_bytes(digest[:8], "little")

    def generator(self) -> np.random.Generator:
        """Stream generator for sampler use (Philox keyed by the derived key)."""
        digest = hashlib.sha256(
            f"{self.master}:{self.replica}:{self.purpose}".encode()
        ).digest()
        key = np.frombuffer(digest[:16], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


_GAMMA = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = (x + _GAMMA).astype(np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _hash_normals(key: int, counters: np.ndarray) -> np.ndarray:
    """Standard normals indexed by counter, via inverse CDF of a 64-bit uniform."""
    with np.errstate(over="ignore"):
        mixed = _splitmix64(np.uint64(key) + _splitmix64(counters.astype(np.uint64)))
    u = (mixed.astype(np.float64) + 0.5) / 2.0 ** 64
    return ndtri(u)


@dataclass(frozen=True)
class Field:
    """Unit-variance disorder values on the interior vertices of a region."""

    region: Region
    values: np.ndarray
    seed: Seed | None = None

    def __post_init__(self):
        if len(self.values) != self.region.n_interior:
            raise ValueError("field must cover exactly the interior vertices")
        self.values.setflags(write=False)

    def value_at(self, vertex) -> float:
        idx = self.region.interior_index()
        key = (int(vertex[0]), int(vertex[1]))
        if key not in idx:
            raise ValueError(f"{vertex} is not an interior vertex")
        return float(self.values[idx[key]])


def sample_field(region: Region, seed: Seed) -> Field:
    """I.i.d. standard normals on the interior vertices, reproducible from seed."""
    n = region.n_interior
    values = _hash_normals(seed.key64(), np.arange(n, dtype=np.uint64))
    return Field(region=region, values=values, seed=seed)


def recompute_vertex(region: Region, seed: Seed, vertex) -> float:
    """Field value at one vertex without generating the whole lattice."""
    idx = region.interior_index()
    key = (int(vertex[0]), int(vertex[1]))
    if key not in idx:
        raise ValueError(f"{vertex} is not an interior vertex")
    return float(_hash_normals(seed.key64(), np.array([idx[key]], dtype=np.uint64))[0])


def zero_field(region: Region) -> Field:
    return Field(region=region, values=np.zeros(region.n_interior), seed=None)


def flip_field(field: Field, vertices) -> Field:
    """h^A: negate the field on a set A of interior vertices (involution)."""
    idx = field.region.interior_index()
    flipped = field.values.copy()
    pts = np.asarray(vertices, dtype=np.int64).reshape(-1, 2) if np.size(vertices) else np.zeros((0, 2), np.int64)
    for x, y in pts.tolist():
        if (x, y) not in idx:
            raise ValueError(f"({x}, {y}) is outside the interior; cannot flip there")
        flipped[idx[(x, y)]] = -flipped[idx[(x, y)]]
    return Field(region=field.region, values=flipped, seed=None)


# ---------------------------------------------------------------------------
# Field files: CSV (x, y, h_v) with a header recording seed and region.


def save_field(field: Field, path) -> None:
    region = field.region
    seed = field.seed
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# region_kind={region.kind}\n")
        fh.write(f"# region_params={','.join(str(p) for p in region.params)}\n")
        fh.write(f"# region_center={region.center[0]},{region.center[1]}\n")
        if seed is not None:
            fh.write(f"# seed_master={seed.master} seed_replica={seed.replica} seed_purpose={seed.purpose}\n")
        fh.write("x,y,h\n")
        for (x, y), h in zip(field.region.interior.tolist(), field.values):
            fh.write(f"{x},{y},{h:.17g}\n")


def load_field(path) -> Field:
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                for part in body.split():
                    if "=" in part:
                        k, v = part.split("=", 1)
                        meta[k] = v
                continue
            if not line or line.startswith("x,"):
                continue
            x, y, h = line.split(",")
            rows.append((int(x), int(y), float(h)))
    from .lattice import build_region

    params = tuple(int(p) for p in meta["region_params"].split(","))
    cx, cy = (int(c) for c in meta["region_center"].split(","))
    region = build_region(meta["region_kind"], params if len(params) > 1 else params[0], (cx, cy))
    idx = region.interior_index()
    values = np.zeros(region.n_interior)
    for x, y, h in rows:
        values[idx[(x, y)]] = h
    seed = None
    if "seed_master" in meta:
        seed = Seed(int(meta["seed_master"]), int(meta["seed_replica"]), meta["seed_purpose"])
    return Field(region=region, values=values, seed=seed)
