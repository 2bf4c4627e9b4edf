"""Utility helpers used across the mupir code base."""

from .combinatorics import binom, cyc_closed_form, cyc_oracle, enumerate_subsets, SubsetId

__all__ = ["SubsetId", "binom", "cyc_closed_form", "cyc_oracle", "enumerate_subsets"]
