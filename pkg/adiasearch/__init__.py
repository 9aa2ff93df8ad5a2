"""
adiasearch - adiabatic search of an unsorted database.

Simulates a search in which the database values act as interaction strengths
of a problem Hamiltonian, and compares its scaling with marked-state
adiabatic search.
"""

__version__ = "1.0.0"
__license__ = "GPL-3.0"
__description__ = "Simulate adiabatic search of an unsorted database"

from .main import main

__all__ = ["main", "__version__", "__license__", "__description__"]
