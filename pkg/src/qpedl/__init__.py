"""Numerical toolkit for quasi-periodic operators: continued fractions, SL(2,R)
cocycles, truncated operators with a first-principles eigensolver, localization
certificates, exponential dynamical localization profiles, KAM reducibility and
Aubry duality."""

__version__ = "0.1.0"
