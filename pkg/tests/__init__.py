"""
Test package for roomloc.
"""
