"""Two-process consensus over two registers per round.

Each side raises its flag, checks the other's, and decides once the
other's flag was down in the previous round.  Both sides can decide,
just never on different values.
"""

from rbr.abstract import bounded_abstract_reach
from rbr.fwo import ProjectionMismatch, combine_same_projections, format_fwo, fwo_of
from rbr.generators import gen_aspnes, gen_aspnes_agreement
from rbr.verifier import verify

for init in ("A0", "A1"):
    p = gen_aspnes(init)
    v = verify(p)
    print(f"start {init}, error {p.error}: {v} after {v.nodes} memories")

p = gen_aspnes_agreement()
v = verify(p)
print(f"both preferences, error {p.error}: {v} after {v.nodes} memories")

xi0 = bounded_abstract_reach(p, 2, target=("R0", 2))
xi1 = bounded_abstract_reach(p, 2, target=("R1", 2))
print("\ndeciding 0 writes", format_fwo(fwo_of(p, xi0)))
print("deciding 1 writes", format_fwo(fwo_of(p, xi1)))
try:
    combine_same_projections(p, xi0, xi1)
except ProjectionMismatch as e:
    print("cannot merge:", e)
