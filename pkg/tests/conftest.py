from hypothesis import settings

from cdpolya.model import ModelParams

# JIT warm-up and sampling-heavy properties make per-example deadlines noisy
settings.register_profile("cdpolya", deadline=None)
settings.load_profile("cdpolya")

# the parameter triples used throughout: minimal, even/even, non-integer shape
TRIPLES = (ModelParams(1, 1, 0), ModelParams(2, 2, 2), ModelParams(1, 3, 5))
