"""Pre-publication news popularity forecasting toolkit.

Pipeline: ingest article corpora, build t-density score tables for
sources, categories, and named entities, derive a binary subjectivity
signal, assemble six-feature vectors, and fit regression/classification
models that forecast how widely an article will be shared.
"""

__version__ = "0.1.0"
