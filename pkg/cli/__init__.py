"""
Configuration-driven experiment runner.
"""
