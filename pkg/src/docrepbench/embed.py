"""Word and document embeddings trained by SGD with negative sampling.

Word vectors come from either the continuous bag-of-words (cbow) or the
skip-gram objective; document vectors from the distributed-memory
paragraph model (pvdm), which mixes a per-document vector into the
averaged context. Negatives are drawn from the unigram distribution
raised to 0.75. Training is sequential single-worker SGD over a seeded
PCG64 stream, which makes results bitwise reproducible for a fixed seed.

The learning rate decays linearly from its starting value to
min_learning_rate across all epochs. Context windows are fixed-width
(no random shrinking), and in the averaged-context modes the full
accumulated gradient is applied to every context member, following the
reference behavior of the original trainer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .preprocess import ProcessedDocument
from .seeds import derive_seed

_NEGATIVE_EXPONENT = 0.75


@dataclass
class EmbeddingParams:
    size: int = 100
    min_count: int = 1
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    seed: int = 0
    mode: str = "cbow"

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("embedding size must be at least 1")


@dataclass
class WordEmbeddings:
    vocab: list[str]
    vectors: np.ndarray
    output_vectors: np.ndarray
    counts: np.ndarray
    params: EmbeddingParams
    epoch_losses: list[float] = field(default_factory=list)

    def index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.vocab)}


@dataclass
class DocEmbeddings:
    doc_ids: list[str]
    vectors: np.ndarray
    word_embeddings: WordEmbeddings
    params: EmbeddingParams
    epoch_losses: list[float] = field(default_factory=list)


def _sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return np.where(
        x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x)))
    )


def negative_sampling_loss(
    center: np.ndarray, target: np.ndarray, negatives: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and analytic gradients for one (center, target, negatives) example.

    loss = -log s(center.target) - sum_k log s(-center.negative_k)
    computed in log-sum-exp form. Returns (loss, d/dcenter, d/dtarget,
    d/dnegatives); the gradient rows of the last term align with the
    negative vectors.
    """
    center = np.asarray(center, dtype=float)
    target = np.asarray(target, dtype=float)
    negatives = np.asarray(negatives, dtype=float).reshape(-1, center.shape[0])
    dot_pos = float(center @ target)
    dot_neg = negatives @ center
    loss = float(np.logaddexp(0.0, -dot_pos) + np.logaddexp(0.0, dot_neg).sum())
    g_pos = _sigmoid(dot_pos) - 1.0
    g_neg = _sigmoid(dot_neg)
    grad_center = g_pos * target + negatives.T @ g_neg
    grad_target = g_pos * center
    grad_negatives = np.outer(g_neg, center)
    return loss, grad_center, grad_target, grad_negatives


def _build_vocab(
    docs: list[ProcessedDocument], min_count: int
) -> tuple[list[str], np.ndarray]:
    counts: dict[str, int] = {}
    for doc in docs:
        for stem in doc.stems():
            counts[stem] = counts.get(stem, 0) + 1
    kept = [(t, c) for t, c in counts.items() if c >= min_count]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    if not kept:
        raise ValueError("empty corpus: no terms reach min_count")
    vocab = [t for t, _ in kept]
    return vocab, np.array([c for _, c in kept], dtype=float)


def _negative_table(counts: np.ndarray) -> np.ndarray:
    weights = counts**_NEGATIVE_EXPONENT
    return np.cumsum(weights / weights.sum())


class _SgdState:
    """Shared bookkeeping for one training run."""

    def __init__(self, params: EmbeddingParams, counts: np.ndarray, n_vectors: int,
                 rng: np.random.Generator, total_positions: int):
        self.params = params
        self.table = _negative_table(counts)
        self.rng = rng
        self.total_positions = max(1, total_positions)
        self.processed = 0
        self.loss_sum = 0.0
        self.loss_count = 0

    def learning_rate(self) -> float:
        p = self.params
        progress = min(1.0, self.processed / self.total_positions)
        return p.learning_rate - progress * (p.learning_rate - p.min_learning_rate)

    def draw_negatives(self, exclude: int) -> np.ndarray:
        draws = np.searchsorted(self.table, self.rng.random(self.params.negatives))
        return draws[draws != exclude]


def _train_pair(
    hidden: np.ndarray,
    target: int,
    output: np.ndarray,
    state: _SgdState,
    lr: float,
) -> np.ndarray:
    """One negative-sampling update; returns the gradient for the input side."""
    negatives = state.draw_negatives(exclude=target)
    rows = np.concatenate(([target], negatives))
    vecs = output[rows]
    dots = vecs @ hidden
    sig = _sigmoid(dots)
    state.loss_sum += float(
        np.logaddexp(0.0, -dots[0]) + np.logaddexp(0.0, dots[1:]).sum()
    )
    state.loss_count += 1
    g = sig.copy()
    g[0] -= 1.0  # positive example pushes toward 1
    output[rows] -= lr * np.outer(g, hidden)
    return g @ vecs


def _iter_positions(sentence: list[int], window: int):
    for pos, center in enumerate(sentence):
        lo = max(0, pos - window)
        hi = min(len(sentence), pos + window + 1)
        context = sentence[lo:pos] + sentence[pos + 1 : hi]
        yield center, context


def _count_positions(doc_sentences: list[list[int]]) -> int:
    return sum(len(s) for s in doc_sentences)


def train_word2vec(
    docs: list[ProcessedDocument], params: EmbeddingParams
) -> WordEmbeddings:
    """Train word vectors; deterministic for a fixed seed."""
    if params.mode not in ("cbow", "skipgram"):
        raise ValueError(f"word2vec mode must be cbow or skipgram, got {params.mode!r}")
    if not docs:
        raise ValueError("empty corpus")
    vocab, counts = _build_vocab(docs, params.min_count)
    index = {t: i for i, t in enumerate(vocab)}
    encoded = [
        [[index[s] for s in sentence if s in index] for sentence in doc.sentences]
        for doc in docs
    ]
    rng = np.random.Generator(np.random.PCG64(params.seed))
    vectors = rng.uniform(-0.5 / params.size, 0.5 / params.size, (len(vocab), params.size))
    output = np.zeros((len(vocab), params.size))
    total = params.epochs * sum(_count_positions(doc) for doc in encoded)
    state = _SgdState(params, counts, len(vocab), rng, total)

    epoch_losses = []
    for _epoch in range(params.epochs):
        state.loss_sum = 0.0
        state.loss_count = 0
        for doc_sentences in encoded:
            for sentence in doc_sentences:
                for center, context in _iter_positions(sentence, params.window):
                    lr = state.learning_rate()
                    if params.mode == "skipgram":
                        # each context word predicts the center word
                        for ctx in context:
                            grad = _train_pair(vectors[ctx], center, output, state, lr)
                            vectors[ctx] -= lr * grad
                    elif context:
                        hidden = vectors[context].mean(axis=0)
                        grad = _train_pair(hidden, center, output, state, lr)
                        vectors[context] -= lr * grad
                    state.processed += 1
        epoch_losses.append(state.loss_sum / max(1, state.loss_count))
    return WordEmbeddings(
        vocab=vocab,
        vectors=vectors,
        output_vectors=output,
        counts=counts,
        params=params,
        epoch_losses=epoch_losses,
    )


def doc_vector_average(emb: WordEmbeddings, doc: ProcessedDocument) -> np.ndarray:
    """Unweighted mean of in-vocabulary word vectors; zeros when none."""
    index = emb.index()
    rows = [index[s] for s in doc.stems() if s in index]
    if not rows:
        return np.zeros(emb.params.size)
    return emb.vectors[rows].mean(axis=0)


def train_doc2vec(docs: list[ProcessedDocument], params: EmbeddingParams) -> DocEmbeddings:
    """Train distributed-memory document vectors jointly with word vectors.

    Every epoch visits the documents in a fresh seeded random order; the
    per-document vector joins the averaged context predicting each word.
    """
    if params.mode != "pvdm":
        raise ValueError(f"doc2vec mode must be pvdm, got {params.mode!r}")
    if not docs:
        raise ValueError("empty corpus")
    ids = [d.id for d in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("document ids must be unique")
    vocab, counts = _build_vocab(docs, params.min_count)
    index = {t: i for i, t in enumerate(vocab)}
    encoded = [
        [[index[s] for s in sentence if s in index] for sentence in doc.sentences]
        for doc in docs
    ]
    rng = np.random.Generator(np.random.PCG64(params.seed))
    word_vectors = rng.uniform(-0.5 / params.size, 0.5 / params.size, (len(vocab), params.size))
    doc_vectors = rng.uniform(-0.5 / params.size, 0.5 / params.size, (len(docs), params.size))
    output = np.zeros((len(vocab), params.size))
    total = params.epochs * sum(_count_positions(doc) for doc in encoded)
    state = _SgdState(params, counts, len(vocab), rng, total)

    epoch_losses = []
    for _epoch in range(params.epochs):
        state.loss_sum = 0.0
        state.loss_count = 0
        for doc_idx in rng.permutation(len(docs)):
            for sentence in encoded[doc_idx]:
                for center, context in _iter_positions(sentence, params.window):
                    lr = state.learning_rate()
                    members = word_vectors[context]
                    hidden = (doc_vectors[doc_idx] + members.sum(axis=0)) / (len(context) + 1)
                    grad = _train_pair(hidden, center, output, state, lr)
                    doc_vectors[doc_idx] -= lr * grad
                    if context:
                        word_vectors[context] -= lr * grad
                    state.processed += 1
        epoch_losses.append(state.loss_sum / max(1, state.loss_count))
    word_emb = WordEmbeddings(
        vocab=vocab,
        vectors=word_vectors,
        output_vectors=output,
        counts=counts,
        params=replace(params, mode="pvdm"),
        epoch_losses=epoch_losses,
    )
    return DocEmbeddings(
        doc_ids=list(ids),
        vectors=doc_vectors,
        word_embeddings=word_emb,
        params=params,
        epoch_losses=epoch_losses,
    )


def infer_doc_vector(
    model: DocEmbeddings, doc: ProcessedDocument, epochs: int | None = None
) -> np.ndarray:
    """Optimize a fresh vector for an unseen document, word vectors frozen.

    Seeded from the document id, so repeated inference of the same text
    returns the same vector. Empty documents map to the zero vector.
    """
    params = model.params
    epochs = params.epochs if epochs is None else epochs
    emb = model.word_embeddings
    index = emb.index()
    encoded = [
        [index[s] for s in sentence if s in index] for sentence in doc.sentences
    ]
    encoded = [s for s in encoded if s]
    if not encoded:
        return np.zeros(params.size)
    rng = np.random.Generator(
        np.random.PCG64(derive_seed(params.seed, "infer", doc.id))
    )
    vector = rng.uniform(-0.5 / params.size, 0.5 / params.size, params.size)
    total = epochs * sum(len(s) for s in encoded)
    state = _SgdState(params, emb.counts, len(emb.vocab), rng, total)
    output = emb.output_vectors  # read-only here: only the new doc vector moves
    for _epoch in range(epochs):
        for sentence in encoded:
            for center, context in _iter_positions(sentence, params.window):
                lr = state.learning_rate()
                members = emb.vectors[context]
                hidden = (vector + members.sum(axis=0)) / (len(context) + 1)
                negatives = state.draw_negatives(exclude=center)
                rows = np.concatenate(([center], negatives))
                vecs = output[rows]
                dots = vecs @ hidden
                g = _sigmoid(dots)
                g[0] -= 1.0
                vector -= lr * (g @ vecs)
                state.processed += 1
    return vector
