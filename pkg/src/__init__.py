"""
Constraint Analyzer

Symbolic analysis of degenerate Lagrangians on the extended phase space
TQ + T*Q: constraint generations, first/second-class classification,
Routh reduction, Dirac brackets and a cross-check of both pictures.
"""

__version__ = "1.0.0"
__author__ = "Constraint Analyzer Team"
