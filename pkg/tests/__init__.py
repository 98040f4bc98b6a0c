"""
Test suite for pppkit
"""
