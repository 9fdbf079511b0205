"""Degradable and antidegradable channel embeddings with certified diamond norms."""
from .channel import (ChannelPair, ChoiMatrix, apply, choi_from_kraus, choi_from_stinespring,
                      complementary_channel, compose, tensor_power)
from .circuit import Circuit, Gate, StinespringRep, compile_to_channel, pad_to_square, parse_circuit
from .degradability import FeasibilityReport, test_antidegradable, test_degradable
from .dnorm import DiamondNormResult, diamond_norm, repetition_bounds, theorem_parameters
from .embed import EmbeddingResult, antidegradable_embedding, degradable_embedding

__version__ = "0.1.0"

__all__ = [
    "ChannelPair", "ChoiMatrix", "Circuit", "DiamondNormResult", "EmbeddingResult",
    "FeasibilityReport", "Gate", "StinespringRep", "antidegradable_embedding", "apply",
    "choi_from_kraus", "choi_from_stinespring", "compile_to_channel", "complementary_channel",
    "compose", "degradable_embedding", "diamond_norm", "pad_to_square", "parse_circuit",
    "repetition_bounds", "tensor_power", "test_antidegradable", "test_degradable",
    "theorem_parameters",
]
