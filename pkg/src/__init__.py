"""
InterSDN - analytic and simulated BGP convergence under partial routing centralization
"""

__version__ = "1.0.0"
__author__ = "InterSDN Team"
