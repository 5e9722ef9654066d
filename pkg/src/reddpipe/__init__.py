"""Topic-filtered disinformation triage over multilingual page embeddings.

Pipeline: ingest page records -> Gaussian-project embeddings -> score and
filter by topic centroid similarity -> train the REDD classifier -> rank
domains -> human review loop that feeds verdicts back into training.
"""

from .errors import (
    ConflictError,
    CorpusError,
    DimensionError,
    NotFoundError,
    ReddpipeError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "ConflictError",
    "CorpusError",
    "DimensionError",
    "NotFoundError",
    "ReddpipeError",
    "ValidationError",
    "__version__",
]
