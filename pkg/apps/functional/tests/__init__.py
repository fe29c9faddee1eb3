"""
FRACNEHARI - Functional Tests
Test suite for the energy functional module.
"""
