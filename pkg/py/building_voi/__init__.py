"""
Value of information analysis for building energy decisions.
"""
from ._version import version
