"""Numerical construction and verification of overdetermined Neumann
eigenvalue domains (Schiffer domains) bifurcating from straight cylinders
in R^N x R/2piZ and from bands around the equator of the 2-sphere."""

from .specfun import BesselOrder, BesselTable, bessel_j, bessel_zero, cap_i, cap_i_deriv

__all__ = [
    "BesselOrder",
    "BesselTable",
    "bessel_j",
    "bessel_zero",
    "cap_i",
    "cap_i_deriv",
]

__version__ = "0.1.0"
