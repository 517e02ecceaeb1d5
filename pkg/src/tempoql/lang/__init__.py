from .nodes import *  # noqa: F401,F403
from .parser import parse
from .tokens import tokenize
from .unparse import unparse
from .subqueries import extract_subqueries
from .complete import complete

__all__ = ["parse", "tokenize", "unparse", "extract_subqueries", "complete"]
