"""Primitive-operation counter for query instrumentation.

Query methods bump the module-level counter once per primitive step: one
bit-sequence access/rank, one record fetch, one table read.  The counter is
what `bench` and the constant-time assertions look at; it is always on
because an integer add is cheap compared to the work it counts.
"""

n = 0


def reset():
    global n
    n = 0


def bump(k=1):
    global n
    n += k


def snapshot():
    return n
