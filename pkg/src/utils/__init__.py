"""
Common utilities for roomloc.
"""
