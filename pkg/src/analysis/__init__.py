"""
Numerical core: Gaussian CDF envelopes, Monte-Carlo simulation and capacity bounds.
"""
