"""Placement, delivery and decoding of the multi-access scheme."""
