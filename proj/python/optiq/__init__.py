"""Quiescence-sequencing optimizer: python surface over the C++ core."""

from ._optiq import (
    TestFunction,
    __version__,
    default_start,
    fe_stability_bound,
    reference_trajectory,
    solve,
    test_function_names,
)

__all__ = [
    "TestFunction",
    "__version__",
    "default_start",
    "fe_stability_bound",
    "reference_trajectory",
    "solve",
    "test_function_names",
]
