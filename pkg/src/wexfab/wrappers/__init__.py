"""Example-driven wrapper induction by context generalization."""

from .learn import (
    LearnConfig,
    Wrapper,
    WrapperVersionError,
    apply_wrapper,
    canonical_record_key,
    learn_wrapper,
    load_wrapper,
    save_wrapper,
)
from .locate import ExampleInstance, Occurrence, locate_instance
from .patterns import Failure, Pattern, PatternToken, extract_context, gap, generalize_pair, slot
from .tokenize import TOKENIZER_VERSION, Token, preprocess, split_words

__all__ = [
    "ExampleInstance",
    "Failure",
    "LearnConfig",
    "Occurrence",
    "Pattern",
    "PatternToken",
    "TOKENIZER_VERSION",
    "Token",
    "Wrapper",
    "WrapperVersionError",
    "apply_wrapper",
    "canonical_record_key",
    "extract_context",
    "gap",
    "generalize_pair",
    "learn_wrapper",
    "load_wrapper",
    "locate_instance",
    "preprocess",
    "save_wrapper",
    "slot",
    "split_words",
]
