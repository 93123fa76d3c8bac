"""Exact spectra, partition functions and level statistics of the hyperbolic
Frahm-Inozemtsev spin chain and its parent dynamical models."""

from .errors import (
    CapExceededError,
    ConvergenceError,
    DomainError,
    FIChainError,
    NoCriticalPointError,
    VerificationError,
)
from .geometry import ChainGeometry, LatticeSpec, build_geometry, laguerre_zeros
from .motifs import EnergyKey, Motif, SpectrumTable, dual_spectrum, spectrum, spectrum_bruteforce

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "ChainGeometry",
    "ConvergenceError",
    "DomainError",
    "EnergyKey",
    "FIChainError",
    "LatticeSpec",
    "Motif",
    "NoCriticalPointError",
    "SpectrumTable",
    "VerificationError",
    "build_geometry",
    "dual_spectrum",
    "laguerre_zeros",
    "spectrum",
    "spectrum_bruteforce",
]
