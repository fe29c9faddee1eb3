"""
FRACNEHARI - Solver Tests
Test suite for the critical point solvers.
"""
