"""Utility modules for coxplasso."""
