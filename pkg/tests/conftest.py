"""Shared test configuration.

Hypothesis is pinned to a derandomized profile so every run explores the
same cases and failures replay exactly.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "fixed",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fixed")
