"""Server privacy audits."""

from .privacy import exhaustive_privacy_check, privacy_mass, statistical_privacy_check

__all__ = ["exhaustive_privacy_check", "privacy_mass", "statistical_privacy_check"]
