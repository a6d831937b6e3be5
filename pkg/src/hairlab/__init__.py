"""Escape-speed classification for exponential-type entire functions:
tower arithmetic, orbit classification, hair tracing, and certified
slow-escape tract construction."""

from . import (bignum, cli, families, hairtrace, logmodel, orbits,
               towers, tract)

__all__ = ["bignum", "cli", "families", "hairtrace", "logmodel",
           "orbits", "towers", "tract"]
__version__ = "0.1.0"
