"""How many processes a counter needs when every tick uses one up.

The ticker can write move1 only once and then stops, so each round of
counting costs a fresh process.  Exhaustive search over concrete runs
finds the fewest processes that reach the error state.
"""

import time

from rbr.concrete import active_rounds, bounded_concrete_search
from rbr.generators import gen_cutoff, gen_drift
from rbr.protocol import desugar

p = desugar(gen_cutoff(2))
for n in range(1, 6):
    t = time.perf_counter()
    run = bounded_concrete_search(p, n, "qE", 3)
    print(f"n={n}: {'reached' if run else 'not reached'} ({time.perf_counter() - t:.2f}s)")
    if run:
        print(run.dump(), end="")
        break

q = desugar(gen_drift(2))
for n in range(1, 6):
    run = bounded_concrete_search(q, n, "qE", 3)
    if run:
        print(f"\ndrift counter: {n} processes, {active_rounds(q, run)} rounds busy at once")
        break
