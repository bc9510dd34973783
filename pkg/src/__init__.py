"""
roomloc: point-mass filter localization of an object in a mapped room
from laser rangefinder beams.
"""
__version__ = '0.1.0'
