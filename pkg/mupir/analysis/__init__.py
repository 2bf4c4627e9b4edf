"""Closed-form rates and system comparisons."""
