"""
Utility functions for configuration, logging, errors, quadrature and output.
"""
