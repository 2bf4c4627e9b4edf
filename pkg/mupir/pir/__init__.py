"""Single-user private information retrieval from replicated servers."""

from .core import PermutationSet, PirAnswer, PirQuery, pir_answer, pir_decode, pir_generate_queries, pir_rate

__all__ = [
    "PermutationSet",
    "PirAnswer",
    "PirQuery",
    "pir_answer",
    "pir_decode",
    "pir_generate_queries",
    "pir_rate",
]
