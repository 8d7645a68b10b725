"""Bag-of-words features: df-thresholded vocabulary, tf / tf-idf, PCA.

The vocabulary, document frequencies and PCA basis are always fitted on
training documents only; test documents are transformed with the frozen
parameters. The idf is the smoothed natural-log form
ln((1 + n) / (1 + df)) + 1, and tf-idf rows are deliberately left
unnormalized. PCA mean-centers (no scaling) and keeps the smallest
leading set of principal components reaching the variance target.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import FeatureMatrix
from .preprocess import ProcessedDocument


@dataclass
class Vocabulary:
    """Lexicographically ordered terms with their document frequencies."""

    terms: list[str]
    doc_freq: dict[str, int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)


def build_vocabulary(docs: list[ProcessedDocument], min_df: int = 5) -> Vocabulary:
    """Keep stems occurring in at least min_df distinct training documents."""
    df: dict[str, int] = {}
    for doc in docs:
        for stem in set(doc.stems()):
            df[stem] = df.get(stem, 0) + 1
    terms = sorted(t for t, c in df.items() if c >= min_df)
    if not terms:
        raise ValueError(
            f"document-frequency threshold {min_df} leaves an empty vocabulary; "
            "lower min_df"
        )
    return Vocabulary(terms=terms, doc_freq={t: df[t] for t in terms}, n_docs=len(docs))


def tf_matrix(docs: list[ProcessedDocument], vocab: Vocabulary) -> FeatureMatrix:
    """Raw term counts; out-of-vocabulary stems are ignored."""
    index = {t: j for j, t in enumerate(vocab.terms)}
    rows = np.zeros((len(docs), len(vocab.terms)))
    for i, doc in enumerate(docs):
        for stem in doc.stems():
            j = index.get(stem)
            if j is not None:
                rows[i, j] += 1.0
    return FeatureMatrix(rows=rows, column_names=list(vocab.terms), doc_ids=[d.id for d in docs])


def idf_vector(vocab: Vocabulary) -> np.ndarray:
    """Smoothed inverse document frequencies from the training corpus."""
    n = vocab.n_docs
    return np.array(
        [math.log((1 + n) / (1 + vocab.doc_freq[t])) + 1.0 for t in vocab.terms]
    )


def tfidf_matrix(docs: list[ProcessedDocument], vocab: Vocabulary) -> FeatureMatrix:
    """tf times idf, with df and n frozen from the training vocabulary."""
    tf = tf_matrix(docs, vocab)
    return FeatureMatrix(
        rows=tf.rows * idf_vector(vocab),
        column_names=tf.column_names,
        doc_ids=tf.doc_ids,
    )


@dataclass
class PcaModel:
    """Mean vector plus orthonormal component rows and their variance shares."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def to_json(self, path: str | Path) -> None:
        payload = {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "PcaModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            mean=np.array(payload["mean"]),
            components=np.array(payload["components"]),
            explained_variance=np.array(payload["explained_variance"]),
            explained_variance_ratio=np.array(payload["explained_variance_ratio"]),
        )


def _fix_component_signs(components: np.ndarray) -> np.ndarray:
    # deterministic orientation: largest-magnitude coordinate positive
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return components


def pca_fit(matrix: FeatureMatrix, variance_target: float = 0.80) -> PcaModel:
    """Fit PCA on training rows, keeping the smallest p components whose
    cumulative explained-variance ratio reaches variance_target.

    Eigendecomposition runs on the d x d sample covariance when the
    feature count does not exceed the row count, otherwise on the n x n
    Gram matrix (same nonzero spectrum, components recovered by
    projection); both paths symmetrize before decomposing.
    """
    X = matrix.rows
    n, d = X.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 rows")
    mean = X.mean(axis=0)
    Xc = X - mean
    total_variance = float((Xc**2).sum() / (n - 1))
    if total_variance <= 0.0:
        raise ValueError("degenerate data: total variance is zero")

    if d <= n:
        cov = (Xc.T @ Xc) / (n - 1)
        cov = (cov + cov.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals = eigvals[order]
        components = eigvecs[:, order].T
    else:
        gram = (Xc @ Xc.T) / (n - 1)
        gram = (gram + gram.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        eigvals = eigvals[order]
        eigvecs = eigvecs[:, order]
        keep = eigvals > 1e-12 * max(eigvals[0], 1.0)
        eigvals = eigvals[keep]
        scale = np.sqrt(eigvals * (n - 1))
        components = (Xc.T @ eigvecs[:, keep] / scale).T

    eigvals = np.clip(eigvals, 0.0, None)
    ratio = eigvals / total_variance
    cumulative = np.cumsum(ratio)
    p = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
    p = min(p, len(eigvals))
    components = _fix_component_signs(np.array(components[:p]))
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=eigvals[:p],
        explained_variance_ratio=ratio[:p],
    )


def pca_transform(model: PcaModel, matrix: FeatureMatrix) -> FeatureMatrix:
    """Project rows onto the fitted components."""
    if matrix.n_features != model.mean.shape[0]:
        raise ValueError(
            f"matrix has {matrix.n_features} columns, model expects "
            f"{model.mean.shape[0]}"
        )
    projected = (matrix.rows - model.mean) @ model.components.T
    names = [f"pc{i + 1}" for i in range(model.n_components)]
    return FeatureMatrix(rows=projected, column_names=names, doc_ids=list(matrix.doc_ids))
