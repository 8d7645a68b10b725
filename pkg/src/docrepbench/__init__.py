"""Benchmarking toolkit for document representation models.

Three feature families (bag-of-words with PCA, word/document embeddings,
word co-occurrence networks) feed a random-forest classifier; per-class
metrics are aggregated into model rankings by non-dominated sorting.
"""

__version__ = "0.1.0"
