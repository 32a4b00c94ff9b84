"""Fully incremental dependency parsing: encodings, arc-eager, verification."""
from .conllu import DepTree, Token, branching_stats, is_projective, projectivize, read_conllu, write_conllu
from .encodings import IncrementalDecoder, LabelSequence, Scheme, coverage, decode, encode
from .evaluation import Metrics, baseline_parse, displacement_curve, macro_average, score
from .incrementality import ParseTrace, TraceRecorder, check_delay, check_monotonic

__version__ = "0.1.0"

__all__ = [
    "DepTree", "Token", "branching_stats", "is_projective", "projectivize", "read_conllu", "write_conllu",
    "IncrementalDecoder", "LabelSequence", "Scheme", "coverage", "decode", "encode",
    "Metrics", "baseline_parse", "displacement_curve", "macro_average", "score",
    "ParseTrace", "TraceRecorder", "check_delay", "check_monotonic",
]
