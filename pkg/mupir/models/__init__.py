"""Data models for system parameters, access structures and run configuration."""
