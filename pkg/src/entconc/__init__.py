"""Simulation of entanglement concentration, dilution and quantum data compression
for pure bipartite states, with every protocol run through a two-party LOCC referee."""
from .qcore import (
    DensityMatrix,
    PureBipartiteState,
    SchmidtForm,
    binary_entropy,
    entanglement_entropy,
    pair_state,
    partial_trace,
    schmidt_decompose,
    singlet,
    werner_state,
)
from .locc import LocalOperation, Party, Referee, Transcript

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "LocalOperation",
    "Party",
    "PureBipartiteState",
    "Referee",
    "SchmidtForm",
    "Transcript",
    "binary_entropy",
    "entanglement_entropy",
    "pair_state",
    "partial_trace",
    "schmidt_decompose",
    "singlet",
    "werner_state",
]
