"""Fast reduced component-by-component construction of rank-1 lattice rules."""
from ._backend import BACKEND
from .number_theory import Modulus
from .kernel import KernelSpec, Space
from .cbc import GeneratingVector, PodWeights, ReductionSchedule, reduced_cbc_fast, reduced_cbc_reference, wce_fast

__version__ = "0.1.0"
