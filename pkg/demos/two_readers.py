"""Two locations that are each coverable, but never in the same run.

One process can finish in q4, another in q6, both at round 1.  Getting
to qE needs a q6 process to see the b written from q4, and the two
paths disagree on whether round 0 was written before round 1.
"""

from rbr.abstract import bounded_abstract_reach, bounded_compatible, concretize
from rbr.fwo import fwo_of, format_fwo
from rbr.generators import gen_fig1
from rbr.protocol import print_protocol
from rbr.verifier import verify

p = gen_fig1()
print(print_protocol(p))

for state in ("q4", "q6", "qE"):
    print(f"{state:>3}: {verify(p, state)}")

for state in ("q4", "q6"):
    xi = bounded_abstract_reach(p, 1, target=(state, 1))
    n, run = concretize(p, xi)
    print(f"\nreaching {state} at round 1 (first writes: {format_fwo(fwo_of(p, xi))}),"
          f" replayed with {n} processes:")
    print(run.dump(), end="")

together = bounded_compatible(p, ("q4", 1), ("q6", 1), 3)
print(f"\nq4 and q6 in one run, rounds up to 3: {together}")
