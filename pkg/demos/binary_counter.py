"""A counter whose top bit flips only after 2^(m-1) rounds.

Each round the tick process writes move1; bit i flips when it reads
move_i and passes the carry up.  The error state is the top bit's one.
"""

import sys
import time

from rbr.abstract import round_saturation_reach
from rbr.generators import gen_counter
from rbr.verifier import format_witness, verify

top = int(sys.argv[1]) if len(sys.argv) > 1 else 6

for m in range(1, top + 1):
    t = time.perf_counter()
    v = verify(gen_counter(m))
    print(f"m={m}: {v}  ({v.nodes} memories, {time.perf_counter() - t:.3f}s)")

print("\nbits coverable per round for m=3:")
for info in round_saturation_reach(gen_counter(3), 4):
    bits = sorted(s for s in info.states if s == "qE" or s[1:2].isdigit())
    print(f"  round {info.round}: {' '.join(b for b in bits if b != 'q0')}")

print("\nwitness for m=3:")
print(format_witness(verify(gen_counter(3))), end="")
