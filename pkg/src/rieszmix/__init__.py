"""Order-theoretic stochastic processes on finite weighted sample spaces.

The vector lattice E is the space of real functions on a finite sample
space; conditional expectations are weighted block averages over partitions.
"""
from .conditional import CondExpectation, Filtration, Partition
from .lattice import (
    BandProjection,
    LatticeElement,
    SampleSpace,
    band_from_element,
    multiply,
    signum_projection,
    truncation_band,
)
from .mixingale import MixingaleCertificate, check_mixingale, minimal_phi
from .processes import AdaptedSequence, ProcessSpec, build_product_space, sequence_from_spec
from .report import CheckReport, DimensionError, PreconditionError

__all__ = [
    "AdaptedSequence",
    "BandProjection",
    "CheckReport",
    "CondExpectation",
    "DimensionError",
    "Filtration",
    "LatticeElement",
    "MixingaleCertificate",
    "Partition",
    "PreconditionError",
    "ProcessSpec",
    "SampleSpace",
    "band_from_element",
    "build_product_space",
    "check_mixingale",
    "minimal_phi",
    "multiply",
    "sequence_from_spec",
    "signum_projection",
    "truncation_band",
]
