"""Stage-graph analysis of population protocols."""
import json
from fractions import Fraction

from . import _core
from ._core import ParseError, ResourceError, corpus_names, protocol_text

__all__ = ["ParseError", "ResourceError", "analyze", "check", "corpus_names", "expected_steps",
           "protocol_text", "simulate"]


def analyze(source, max_stages=100000, timeout=1000.0):
    """Build the stage tree of a corpus name or protocol text.

    Returns (report, tree, complete) with report and tree as dicts.
    """
    report, tree, complete = _core.analyze(source, max_stages, timeout)
    return json.loads(report), json.loads(tree), complete


def simulate(source, config, trials=1000, seed=0):
    return _core.simulate(source, config, trials, seed)


def expected_steps(source, config):
    num, den = _core.expected_steps(source, config)
    return Fraction(int(num), int(den))


def check(source, max_n=6):
    return _core.check(source, max_n)
