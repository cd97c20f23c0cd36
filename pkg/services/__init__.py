"""
Services Package - bifurcation analysis of the pulse-driven TaO memristor
"""

__version__ = "1.0.0"
