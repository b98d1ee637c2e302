"""Labeled sample storage: newline-delimited JSON persistence and split regimes.

File layout: a header line {"version", "n", "d"} followed by one JSON object
per record.  Feature values are serialized as hex-float strings so that a
save/load round trip is bit-exact.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import rng
from .codec import encode_label, parse_bits

FORMAT_VERSION = 1

SOURCES = ("manual_training", "override", "automation", "synthetic")


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""


@dataclass(eq=False)
class SampleRecord:
    """One labeled observation: feature vector plus provenance."""

    features: np.ndarray
    label: int
    label_bits: str
    run: int
    timestamp: float
    source: str
    scene: Optional[str] = None
    image_ref: Optional[str] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 1:
            raise ValueError("features must be a 1-D vector")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")
        if self.features.size and (self.features.min() < 0.0 or self.features.max() > 1.0):
            raise ValueError("features must lie in [0, 1]")
        if self.source not in SOURCES:
            raise ValueError(f"unknown sample source {self.source!r}")
        expected = encode_label(parse_bits(self.label_bits)).value
        if self.label != expected:
            raise ValueError(
                f"label {self.label} disagrees with label_bits {self.label_bits!r} (expect {expected})"
            )
        if self.run < 1:
            raise ValueError(f"run index must be >= 1, got {self.run}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleRecord):
            return NotImplemented
        return (
            self.label == other.label
            and self.label_bits == other.label_bits
            and self.run == other.run
            and self.timestamp == other.timestamp
            and self.source == other.source
            and self.scene == other.scene
            and self.image_ref == other.image_ref
            and self.features.shape == other.features.shape
            and bool(np.all(self.features == other.features))
        )


@dataclass(eq=False)
class Dataset:
    """An ordered, homogeneous collection of sample records."""

    n: int
    d: int
    records: List[SampleRecord] = field(default_factory=list)

    def __post_init__(self):
        for i, rec in enumerate(self.records):
            self._check_record(i, rec)

    def _check_record(self, i: int, rec: SampleRecord) -> None:
        if rec.features.size != self.d:
            raise ValueError(f"record {i}: feature dim {rec.features.size} != {self.d}")
        if rec.label >= (1 << self.n):
            raise ValueError(f"record {i}: label {rec.label} out of range for n={self.n}")

    def append(self, rec: SampleRecord) -> None:
        self._check_record(len(self.records), rec)
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.n == other.n and self.d == other.d and self.records == other.records

    def runs(self) -> List[int]:
        """Distinct run ids present, ascending."""
        return sorted({rec.run for rec in self.records})

    def feature_matrix(self) -> np.ndarray:
        if not self.records:
            return np.zeros((0, self.d))
        return np.stack([rec.features for rec in self.records])

    def label_array(self) -> np.ndarray:
        return np.array([rec.label for rec in self.records], dtype=np.int64)


def _record_to_json(rec: SampleRecord) -> dict:
    return {
        "features": [float.hex(float(v)) for v in rec.features],
        "label": rec.label,
        "label_bits": rec.label_bits,
        "run": rec.run,
        "timestamp": rec.timestamp,
        "source": rec.source,
        "scene": rec.scene,
        "image_ref": rec.image_ref,
    }


def _record_from_json(obj: dict, lineno: int) -> SampleRecord:
    for key in ("features", "label", "label_bits", "run", "timestamp", "source"):
        if key not in obj:
            raise DatasetFormatError(f"line {lineno}: missing field {key!r}")
    try:
        features = np.array([float.fromhex(v) for v in obj["features"]], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(f"line {lineno}: bad field 'features': {exc}") from exc
    try:
        return SampleRecord(
            features=features,
            label=obj["label"],
            label_bits=obj["label_bits"],
            run=obj["run"],
            timestamp=obj["timestamp"],
            source=obj["source"],
            scene=obj.get("scene"),
            image_ref=obj.get("image_ref"),
        )
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(f"line {lineno}: invalid record: {exc}") from exc


def header_line(n: int, d: int) -> str:
    return json.dumps({"version": FORMAT_VERSION, "n": n, "d": d})


def record_line(rec: SampleRecord) -> str:
    return json.dumps(_record_to_json(rec))


def save(dataset: Dataset, path: str) -> None:
    """Write the dataset as header + one JSON record per line."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(header_line(dataset.n, dataset.d) + "\n")
        for rec in dataset.records:
            fh.write(record_line(rec) + "\n")
    os.replace(tmp, path)


def load(path: str) -> Dataset:
    """Read a dataset file; malformed lines raise with their line number."""
    with open(path, "r", encoding="utf-8") as fh:
        header_text = fh.readline()
        if not header_text.strip():
            raise DatasetFormatError("line 1: missing header")
        try:
            header = json.loads(header_text)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"line 1: bad header: {exc}") from exc
        version = header.get("version")
        if version != FORMAT_VERSION:
            raise DatasetFormatError(f"line 1: unsupported version {version!r}")
        if "n" not in header or "d" not in header:
            raise DatasetFormatError("line 1: header must carry n and d")
        ds = Dataset(n=int(header["n"]), d=int(header["d"]))
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: bad JSON: {exc}") from exc
            rec = _record_from_json(obj, lineno)
            try:
                ds.append(rec)
            except ValueError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from exc
        return ds


def split_merge_shuffle(dataset: Dataset, fraction: float = 0.8, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Pool all runs, shuffle with the seeded Fisher-Yates, split train/test."""
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"train fraction must be in (0, 1), got {fraction}")
    total = len(dataset)
    if total < 2:
        raise ValueError("need at least 2 records to split")
    order = rng.shuffled(range(total), seed)
    n_train = math.ceil(fraction * total)
    if n_train == 0 or n_train == total:
        raise ValueError(f"degenerate split: {n_train} train of {total}")
    train = Dataset(n=dataset.n, d=dataset.d, records=[dataset.records[i] for i in order[:n_train]])
    test = Dataset(n=dataset.n, d=dataset.d, records=[dataset.records[i] for i in order[n_train:]])
    return train, test


def split_cross_run(dataset: Dataset, held_out_run: int) -> Tuple[Dataset, Dataset]:
    """Hold out one collection run as the test set; train on the rest."""
    runs = dataset.runs()
    if held_out_run not in runs:
        raise ValueError(f"run {held_out_run} not present (have {runs})")
    if len(runs) < 2:
        raise ValueError("cross-run split needs at least 2 distinct runs")
    train_recs = [rec for rec in dataset.records if rec.run != held_out_run]
    test_recs = [rec for rec in dataset.records if rec.run == held_out_run]
    train = Dataset(n=dataset.n, d=dataset.d, records=train_recs)
    test = Dataset(n=dataset.n, d=dataset.d, records=test_recs)
    return train, test


@dataclass
class Profile:
    """Counts by control bits and by scene, renderable as an aligned table."""

    by_label_bits: Dict[str, int]
    by_scene: Dict[str, int]
    total: int

    def render(self) -> str:
        from .scenes import catalog  # local import, scenes depends on this module

        entries = {e.id: e for e in catalog()}
        lines = []
        lines.append(f"{'ID':<8}{'Scene':<42}{'Output':<8}{'Shots':>7}")
        lines.append("-" * 65)
        for scene_id in sorted(self.by_scene):
            entry = entries.get(scene_id)
            desc = entry.description if entry else ""
            bits = str(entry.preferred_output) if entry else ""
            lines.append(f"{scene_id:<8}{desc:<42}{bits:<8}{self.by_scene[scene_id]:>7}")
        lines.append("-" * 65)
        lines.append(f"{'Output':<8}{'Count':>7}")
        for bits in sorted(self.by_label_bits):
            lines.append(f"{bits:<8}{self.by_label_bits[bits]:>7}")
        lines.append(f"{'total':<8}{self.total:>7}")
        return "\n".join(lines)


def profile(dataset: Dataset) -> Profile:
    """Tabulate per-label and per-scene counts; sums equal the dataset size."""
    by_bits: Dict[str, int] = {}
    by_scene: Dict[str, int] = {}
    for rec in dataset.records:
        by_bits[rec.label_bits] = by_bits.get(rec.label_bits, 0) + 1
        scene = rec.scene if rec.scene is not None else "(none)"
        by_scene[scene] = by_scene.get(scene, 0) + 1
    return Profile(by_label_bits=by_bits, by_scene=by_scene, total=len(dataset))
