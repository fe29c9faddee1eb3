"""
FRACNEHARI - Bubble Tests
Test suite for the bubble asymptotics module.
"""
