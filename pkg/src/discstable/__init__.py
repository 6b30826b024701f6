"""Discrete stable distributions: generating functions, probabilities, moments,
sampling and numerical verification of their stability properties."""

from .distributions import (
    DS,
    FAMILIES,
    PDS,
    SDS,
    TPDS,
    Degenerate,
    DiscreteStableDist,
    FirstPassage,
    GeomPortlyStable,
    Support,
    char_fn,
    ds_negate,
    ds_sum,
    from_dict,
    pgf,
    support,
)
from .errors import (
    BranchError,
    ConvergenceError,
    DiscStableError,
    DomainError,
    DomainEscapeError,
    FamilyMismatchError,
    InstabilityError,
    SampleOverflowError,
)
from .moments import factorial_moment, fractional_moment_sds, moment_existence
from .pmf import PmfResult, pmf
from .sampler import RandomStream, SampleBatch, sample

__version__ = "0.1.0"

__all__ = [
    "DS",
    "FAMILIES",
    "PDS",
    "SDS",
    "TPDS",
    "Degenerate",
    "DiscreteStableDist",
    "FirstPassage",
    "GeomPortlyStable",
    "Support",
    "char_fn",
    "ds_negate",
    "ds_sum",
    "from_dict",
    "pgf",
    "support",
    "BranchError",
    "ConvergenceError",
    "DiscStableError",
    "DomainError",
    "DomainEscapeError",
    "FamilyMismatchError",
    "InstabilityError",
    "SampleOverflowError",
    "factorial_moment",
    "fractional_moment_sds",
    "moment_existence",
    "PmfResult",
    "pmf",
    "RandomStream",
    "SampleBatch",
    "sample",
]
