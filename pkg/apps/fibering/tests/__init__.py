"""
FRACNEHARI - Fibering Tests
Test suite for the fibering and Nehari module.
"""
