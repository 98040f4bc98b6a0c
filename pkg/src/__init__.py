"""
pppkit

Gaussian-approximation bounds for Poisson-field interference, Monte-Carlo
validation, and outage / sum capacity envelopes built on them.
"""

__version__ = "0.1.0"
