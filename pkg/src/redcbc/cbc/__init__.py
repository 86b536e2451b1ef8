"""Worst-case errors, reduced CBC constructions and their error bounds."""
from .types import GeneratingVector, PodWeights, ReductionSchedule
from .wce import wce_bruteforce, wce_fast, wce_product
from .construct import CbcResult, reduced_cbc_fast, reduced_cbc_reference, extend_errors_with_zero_components
from .bounds import theorem3_bound, theorem4_rmse_bound, subset_bound_sum
from .io import read_vector, write_vector, format_vector, parse_vector

__all__ = [
    "GeneratingVector", "PodWeights", "ReductionSchedule",
    "wce_bruteforce", "wce_fast", "wce_product",
    "CbcResult", "reduced_cbc_fast", "reduced_cbc_reference", "extend_errors_with_zero_components",
    "theorem3_bound", "theorem4_rmse_bound", "subset_bound_sum",
    "read_vector", "write_vector", "format_vector", "parse_vector",
]
