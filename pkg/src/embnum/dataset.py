"""Loading, writing, generating, and partitioning labeled numeric-column datasets.

On-disk layout: ``root/<source_id>/<label_id>.csv``, UTF-8, one decimal
literal per line, no header.  Scientific notation is accepted; NaN, infinities
and non-numeric tokens are hard errors.  The column-header ``name`` field is
not persisted by this format.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyAttribute,
    InvalidSpec,
    MalformedValue,
    MissingDirectory,
    UnknownSource,
)

THREADS_ENV = "EMBNUM_THREADS"


def worker_count() -> int:
    """Worker cap for parallel file loading, overridable via EMBNUM_THREADS."""
    limit = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            limit = min(limit, max(1, int(raw)))
        except ValueError:
            pass
    return min(8, limit)


@dataclass(eq=False)
class NumericAttribute:
    """One labeled table column: a non-empty list of finite numbers."""

    values: np.ndarray
    label: str
    source: str
    name: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise EmptyAttribute(f"attribute {self.source}/{self.label} has no values")
        if not np.all(np.isfinite(arr)):
            raise MalformedValue(
                f"attribute {self.source}/{self.label} contains NaN or infinity"
            )
        if not self.label or not self.source:
            raise MalformedValue("label and source must be non-empty strings")
        self.values = arr

    def __eq__(self, other):
        if not isinstance(other, NumericAttribute):
            return NotImplemented
        return (
            self.label == other.label
            and self.source == other.source
            and self.name == other.name
            and np.array_equal(self.values, other.values)
        )


@dataclass(eq=False)
class Dataset:
    """A multi-source collection of labeled numeric attributes.

    (source, label) pairs are unique; equality is order-insensitive.
    """

    sources: list[str]
    labels: list[str]
    attributes: list[NumericAttribute]

    def __post_init__(self):
        srcs, lbls = set(self.sources), set(self.labels)
        seen = set()
        for attr in self.attributes:
            if attr.source not in srcs:
                raise MalformedValue(f"attribute source {attr.source!r} not declared")
            if attr.label not in lbls:
                raise MalformedValue(f"attribute label {attr.label!r} not declared")
            key = (attr.source, attr.label)
            if key in seen:
                raise MalformedValue(f"duplicate (source, label) pair {key}")
            seen.add(key)
        if len(self.labels) > len(self.attributes):
            raise MalformedValue("more labels than attributes")

    @classmethod
    def from_attributes(cls, attributes: list[NumericAttribute]) -> "Dataset":
        sources = sorted({a.source for a in attributes})
        labels = sorted({a.label for a in attributes})
        return cls(sources=sources, labels=labels, attributes=list(attributes))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if set(self.sources) != set(other.sources):
            return False
        if set(self.labels) != set(other.labels):
            return False
        key = lambda a: (a.source, a.label)
        return sorted(self.attributes, key=key) == sorted(other.attributes, key=key)

    def by_source(self, source: str) -> list[NumericAttribute]:
        return [a for a in self.attributes if a.source == source]


def format_value(v: float) -> str:
    """Shortest decimal form that parses back to the same float."""
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _parse_attribute_file(path: Path, source: str, label: str) -> NumericAttribute:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                v = float(token)
            except ValueError:
                raise MalformedValue(f"{path}:{lineno}: not a number: {token!r}") from None
            if not math.isfinite(v):
                raise MalformedValue(f"{path}:{lineno}: non-finite value: {token!r}")
            values.append(v)
    if not values:
        raise EmptyAttribute(f"{path}: no parsable rows")
    return NumericAttribute(values=np.array(values), label=label, source=source)


def load_attribute_csv(path, label: str | None = None,
                       source: str = "query") -> NumericAttribute:
    """Load one attribute file outside the dataset tree (e.g. a query)."""
    p = Path(path)
    if not p.is_file():
        raise MissingDirectory(f"attribute file {p} does not exist")
    return _parse_attribute_file(p, source, label or p.stem)


def load_dataset(root_path) -> Dataset:
    """Load a dataset from a root/<source>/<label>.csv tree.

    Files are parsed in parallel (bounded by EMBNUM_THREADS); the returned
    Dataset is immutable by convention and safe to share.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise MissingDirectory(f"dataset root {root} does not exist")
    source_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not source_dirs:
        raise MissingDirectory(f"dataset root {root} contains no source directories")
    jobs = []
    for src_dir in source_dirs:
        for f in sorted(src_dir.glob("*.csv")):
            jobs.append((f, src_dir.name, f.stem))
    if not jobs:
        raise MissingDirectory(f"dataset root {root} contains no attribute files")
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        attributes = list(pool.map(lambda j: _parse_attribute_file(*j), jobs))
    return Dataset.from_attributes(attributes)


def write_dataset(dataset: Dataset, root_path) -> Path:
    """Write a dataset in the on-disk layout; files are written atomically."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    for attr in dataset.attributes:
        src_dir = root / attr.source
        src_dir.mkdir(exist_ok=True)
        body = "\n".join(format_value(v) for v in attr.values) + "\n"
        _write_text_atomic(src_dir / f"{attr.label}.csv", body)
    return root


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# synthetic data


FAMILIES = ("uniform", "normal", "lognormal", "exponential", "counts")


@dataclass(frozen=True)
class FamilySpec:
    """Distribution family with location/scale/shape parameters for one label."""

    family: str
    location: float = 0.0
    scale: float = 1.0
    shape: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        if self.scale <= 0:
            raise InvalidSpec("scale must be positive")


@dataclass(frozen=True)
class SyntheticSpec:
    label_count: int
    source_count: int
    rows_min: int
    rows_max: int
    family_pool: tuple[FamilySpec, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.label_count < 1 or self.source_count < 1:
            raise InvalidSpec("label_count and source_count must be positive")
        if self.rows_min < 1 or self.rows_min > self.rows_max:
            raise InvalidSpec("need 1 <= rows_min <= rows_max")
        if self.family_pool is not None:
            object.__setattr__(self, "family_pool", tuple(self.family_pool))
            if self.label_count > len(self.family_pool):
                raise InvalidSpec("family_pool smaller than label_count")
        if not (0 <= self.seed < 2**64):
            raise InvalidSpec("seed must fit in 64 unsigned bits")


def default_family_pool(label_count: int) -> tuple[FamilySpec, ...]:
    """A pool of mutually distinguishable families, one per label.

    Families cycle while location/scale/shape walk apart, so neighboring
    labels differ in both distribution form and range.
    """
    pool = []
    for i in range(label_count):
        pool.append(
            FamilySpec(
                family=FAMILIES[i % len(FAMILIES)],
                location=4.0 * i,
                scale=1.0 + 0.6 * (i % 7),
                shape=0.35 + 0.2 * (i % 4),
            )
        )
    return tuple(pool)


def _draw_family(rng: np.random.Generator, fam: FamilySpec, loc: float, rows: int) -> np.ndarray:
    if fam.family == "uniform":
        return loc + fam.scale * rng.random(rows)
    if fam.family == "normal":
        return loc + fam.scale * rng.standard_normal(rows)
    if fam.family == "lognormal":
        return loc + rng.lognormal(mean=np.log(fam.scale), sigma=fam.shape, size=rows)
    if fam.family == "exponential":
        return loc + rng.exponential(scale=fam.scale, size=rows)
    # counts: discrete non-negative integers
    return loc + rng.poisson(lam=10.0 * fam.scale, size=rows).astype(np.float64)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministically generate label_count x source_count attributes.

    Each label owns one family from the pool; per-source location jitter of
    5% of the family scale keeps sources similar but not identical.
    """
    pool = spec.family_pool or default_family_pool(spec.label_count)
    width_l = max(2, len(str(spec.label_count - 1)))
    width_s = max(1, len(str(spec.source_count - 1)))
    labels = [f"y{i:0{width_l}d}" for i in range(spec.label_count)]
    sources = [f"s{i:0{width_s}d}" for i in range(spec.source_count)]
    rng = np.random.default_rng(spec.seed)
    attributes = []
    for li, label in enumerate(labels):
        fam = pool[li]
        for source in sources:
            rows = int(rng.integers(spec.rows_min, spec.rows_max + 1))
            jitter = 0.05 * fam.scale * rng.uniform(-1.0, 1.0)
            values = _draw_family(rng, fam, fam.location + jitter, rows)
            attributes.append(NumericAttribute(values=values, label=label, source=source))
    return Dataset(sources=sources, labels=labels, attributes=attributes)


def spec_from_json(text: str) -> SyntheticSpec:
    """Parse a SyntheticSpec JSON document (family_pool optional)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"invalid spec JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidSpec("spec JSON must be an object")
    pool = None
    if doc.get("family_pool") is not None:
        try:
            pool = tuple(FamilySpec(**entry) for entry in doc["family_pool"])
        except TypeError as exc:
            raise InvalidSpec(f"bad family_pool entry: {exc}") from None
    try:
        return SyntheticSpec(
            label_count=int(doc["label_count"]),
            source_count=int(doc["source_count"]),
            rows_min=int(doc["rows_min"]),
            rows_max=int(doc["rows_max"]),
            family_pool=pool,
            seed=int(doc.get("seed", 0)),
        )
    except KeyError as exc:
        raise InvalidSpec(f"spec JSON missing field {exc}") from None


# ---------------------------------------------------------------------------
# partitioning


def split_holdout(dataset: Dataset, unknown_source: str) -> tuple[Dataset, Dataset]:
    """Partition into (labeled, queries): queries = attributes of one source."""
    if unknown_source not in dataset.sources:
        raise UnknownSource(f"source {unknown_source!r} not in dataset")
    queries = [a for a in dataset.attributes if a.source == unknown_source]
    labeled = [a for a in dataset.attributes if a.source != unknown_source]
    return Dataset.from_attributes(labeled), Dataset.from_attributes(queries)


def split_half(dataset: Dataset, axis: str = "source", seed: int = 0) -> tuple[Dataset, Dataset]:
    """Random 50/50 split along sources (default) or labels."""
    if axis not in ("source", "label"):
        raise InvalidSpec(f"split axis must be 'source' or 'label', got {axis!r}")
    ids = list(dataset.sources if axis == "source" else dataset.labels)
    rng = np.random.default_rng(seed)
    rng.shuffle(ids)
    first = set(ids[: (len(ids) + 1) // 2])
    pick = lambda a: (a.source if axis == "source" else a.label) in first
    part_a = [a for a in dataset.attributes if pick(a)]
    part_b = [a for a in dataset.attributes if not pick(a)]
    return Dataset.from_attributes(part_a), Dataset.from_attributes(part_b)


def dataset_fingerprint(dataset: Dataset) -> str:
    """SHA-256 over the canonical byte serialization of all attributes."""
    digest = hashlib.sha256()
    for attr in sorted(dataset.attributes, key=lambda a: (a.source, a.label)):
        digest.update(attr.source.encode())
        digest.update(b"\0")
        digest.update(attr.label.encode())
        digest.update(b"\0")
        digest.update(np.ascontiguousarray(attr.values, dtype="<f8").tobytes())
    return digest.hexdigest()
