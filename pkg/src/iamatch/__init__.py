"""Matching individuals to capacitated activities under interests and peer affinities."""

from .criteria import SocialRule, evaluate
from .engine import Mechanism, hill_climb, solve, solve_inclusive, solve_selective
from .errors import IAError
from .model import VOID, IAProblem, Matching, generate_random, toy_problem, utilities, utility

__version__ = "0.1.0"
