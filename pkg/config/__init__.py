"""
FRACNEHARI - Config Package
Django settings for the numerical apps and the experiment CLI.
"""
