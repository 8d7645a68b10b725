"""Corpus ingestion, statistics, and stratified train/test splitting.

Corpora load from JSON-lines files (one object per line with id/text/label
fields) or from a directory-per-label tree. Splits are seeded with PCG64,
the repository's fixed pseudo-random generator, so a (corpus, spec) pair
always maps to the same partition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .preprocess import ProcessedDocument


@dataclass
class RawDocument:
    id: str
    text: str
    label: str


@dataclass
class Corpus:
    documents: list[RawDocument]
    label_set: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.label_set:
            self.label_set = sorted({d.label for d in self.documents})

    def __len__(self) -> int:
        return len(self.documents)

    def labels(self) -> list[str]:
        return [d.label for d in self.documents]


@dataclass
class SplitSpec:
    """How to partition a corpus.

    mode "stratified" samples train_fraction of every class without
    replacement; mode "predefined" returns the supplied id lists verbatim.
    """

    mode: str = "stratified"
    train_fraction: float = 0.8
    seed: int = 0
    train_ids: list[str] | None = None
    test_ids: list[str] | None = None


@dataclass
class CorpusStats:
    n_docs: int
    n_distinct_stems: int
    total_length: int
    min_len: int
    max_len: int
    avg_len: float
    label_histogram: dict[str, int]


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load a labeled corpus from disk.

    format "jsonl": UTF-8 file, one JSON object per line with fields
    id, text, label. format "labeled-dirs": every subdirectory of path is
    a label, every file inside one document (id = "label/filename").
    Document order is file/lexicographic order.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    docs: list[RawDocument] = []
    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                for field_name in ("id", "text", "label"):
                    if field_name not in record:
                        raise ValueError(
                            f"{path}:{lineno}: record is missing field "
                            f"'{field_name}': {line[:80]}"
                        )
                docs.append(
                    RawDocument(
                        id=str(record["id"]),
                        text=str(record["text"]),
                        label=str(record["label"]),
                    )
                )
    elif format == "labeled-dirs":
        for label_dir in sorted(p for p in path.iterdir() if p.is_dir()):
            for doc_file in sorted(p for p in label_dir.iterdir() if p.is_file()):
                docs.append(
                    RawDocument(
                        id=f"{label_dir.name}/{doc_file.name}",
                        text=doc_file.read_text(encoding="utf-8", errors="replace"),
                        label=label_dir.name,
                    )
                )
    else:
        raise ValueError(f"unknown corpus format: {format!r}")
    if not docs:
        raise ValueError(f"no documents found in {path}")
    seen: set[str] = set()
    for doc in docs:
        if not doc.label:
            raise ValueError(f"document {doc.id!r} has an empty label")
        if doc.id in seen:
            raise ValueError(f"duplicate document id: {doc.id!r}")
        seen.add(doc.id)
    return Corpus(documents=docs)


def corpus_stats(corpus: Corpus, preprocessed: list[ProcessedDocument]) -> CorpusStats:
    """Corpus-level statistics with lengths counted in stems."""
    if len(preprocessed) != len(corpus.documents):
        raise ValueError(
            f"preprocessed list has {len(preprocessed)} entries for "
            f"{len(corpus.documents)} documents"
        )
    lengths = [len(doc.stems()) for doc in preprocessed]
    distinct: set[str] = set()
    for doc in preprocessed:
        distinct.update(doc.stems())
    histogram: dict[str, int] = {}
    for doc in corpus.documents:
        histogram[doc.label] = histogram.get(doc.label, 0) + 1
    n = len(corpus.documents)
    return CorpusStats(
        n_docs=n,
        n_distinct_stems=len(distinct),
        total_length=sum(lengths),
        min_len=min(lengths),
        max_len=max(lengths),
        avg_len=sum(lengths) / n,
        label_histogram=histogram,
    )


def _train_count(class_size: int, fraction: Fraction) -> int:
    """Per-class training allocation.

    Threshold rounding in exact rational arithmetic: start from the
    ceiling and fall back to the floor for classes whose ceiling would
    overshoot fraction*size by at least the training fraction itself
    (equivalently, round up only when the fractional part exceeds the
    test share 1 - fraction). Keeps every class within one document of
    its exact share while reproducing the published 401/99 partition of
    a 500-document, 15-class corpus at 80%.
    """
    exact = fraction * class_size
    floor = exact.numerator // exact.denominator
    frac = exact - floor
    return floor + (1 if frac > 1 - fraction else 0)


def stratified_split(corpus: Corpus, spec: SplitSpec) -> tuple[list[int], list[int]]:
    """Partition document indices into train and test sets.

    Deterministic for a fixed (corpus, spec): per class, indices are
    shuffled by a PCG64 generator seeded from spec.seed and the head of
    the shuffle goes to training.
    """
    if spec.mode == "predefined":
        if spec.train_ids is None or spec.test_ids is None:
            raise ValueError("predefined split requires train_ids and test_ids")
        index_of = {d.id: i for i, d in enumerate(corpus.documents)}
        try:
            train_idx = [index_of[i] for i in spec.train_ids]
            test_idx = [index_of[i] for i in spec.test_ids]
        except KeyError as exc:
            raise ValueError(f"split id not in corpus: {exc.args[0]!r}") from None
        if set(train_idx) & set(test_idx):
            raise ValueError("predefined train and test sets overlap")
        if len(train_idx) + len(test_idx) != len(corpus.documents):
            raise ValueError("predefined split does not cover the corpus")
        return train_idx, test_idx
    if spec.mode != "stratified":
        raise ValueError(f"unknown split mode: {spec.mode!r}")
    if not 0 < spec.train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")

    by_label: dict[str, list[int]] = {}
    for i, doc in enumerate(corpus.documents):
        by_label.setdefault(doc.label, []).append(i)
    for label, members in by_label.items():
        if len(members) < 2:
            raise ValueError(
                f"class {label!r} has a single document; stratified splitting "
                "needs at least 2 per class (consider merging classes)"
            )

    fraction = Fraction(spec.train_fraction).limit_denominator(10**6)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_label):
        members = np.array(by_label[label])
        order = rng.permutation(len(members))
        k = _train_count(len(members), fraction)
        train_idx.extend(int(i) for i in members[order[:k]])
        test_idx.extend(int(i) for i in members[order[k:]])
    return sorted(train_idx), sorted(test_idx)


def write_split_manifest(
    path: str | Path, corpus: Corpus, train_idx: list[int], test_idx: list[int]
) -> None:
    """Emit the split as JSON {"train": [ids], "test": [ids]}."""
    payload = {
        "train": [corpus.documents[i].id for i in train_idx],
        "test": [corpus.documents[i].id for i in test_idx],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_split_manifest(path: str | Path, corpus: Corpus) -> tuple[list[int], list[int]]:
    """Load a split manifest back into index lists."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    spec = SplitSpec(mode="predefined", train_ids=payload["train"], test_ids=payload["test"])
    return stratified_split(corpus, spec)


def stats_to_dict(stats: CorpusStats) -> dict:
    return {
        "n_docs": stats.n_docs,
        "n_distinct_stems": stats.n_distinct_stems,
        "total_length": stats.total_length,
        "min_len": stats.min_len,
        "max_len": stats.max_len,
        "avg_len": stats.avg_len,
        "label_histogram": dict(sorted(stats.label_histogram.items())),
    }
