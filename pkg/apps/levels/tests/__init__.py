"""
FRACNEHARI - Level Tests
Test suite for the Galerkin level structure.
"""
