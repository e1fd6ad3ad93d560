"""A quantified formula evaluated one round at a time.

Round k of the protocol holds the k-th valuation of a counter over the
variables, and the flags written there say how far the evaluation got.
The error state needs the outermost flag to say yes.
"""

import random

from rbr.abstract import round_saturation_reach
from rbr.generators import gen_qbf
from rbr.qbf import qbf_trace, qbf_validity_brute, random_formula
from rbr.verifier import verify

rng = random.Random(3)
seen = set()
while seen != {True, False}:
    phi = random_formula(rng, 4, 4)
    valid = qbf_validity_brute(phi)
    if valid in seen and rng.random() < 0.8:
        continue
    seen.add(valid)
    print(phi)
    print(f"  valid: {valid}   verifier: {verify(gen_qbf(phi))}")

phi = random_formula(random.Random(11), 2, 3)
print(f"\n{phi}")
info = round_saturation_reach(gen_qbf(phi), 5)
# flags computed from round k-1's valuation are written into round k
for (val, flags), row in zip(qbf_trace(phi, 6), info):
    lits = sorted(s for s in row.writable if s.startswith(("x", "nx")))
    flag_syms = sorted(s for s in row.writable if s not in lits)
    print(f"  round {row.round}: literals {' '.join(lits):<8} flags {' '.join(flag_syms) or '-':<16}"
          f" (counter: {val} gives {'/'.join(flags)})")
