#!/usr/bin/env python3

"""Version information for spanemu."""

__version__ = "0.1.0"
__license__ = "MIT"
