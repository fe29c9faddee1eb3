"""
FRACNEHARI - Assembly Tests
Test suite for the assembly module.
"""
