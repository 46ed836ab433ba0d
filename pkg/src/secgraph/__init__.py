"""Encrypted dynamic graph search over a simulated enclave boundary."""

from .config import Params
from .crypto import SecretKeys
from .system import GraphSearchSystem
from .types import RankedResult, SearchQuery

__all__ = ["Params", "SecretKeys", "GraphSearchSystem", "RankedResult",
           "SearchQuery"]
