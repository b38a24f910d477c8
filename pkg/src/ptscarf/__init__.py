"""Numerical construction and verification of the C operator for the
PT-symmetric Scarf I potential."""

from .scarf import ModelParams

__all__ = ["ModelParams"]
