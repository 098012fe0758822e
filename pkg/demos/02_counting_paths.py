"""Counting path functionals two ways.

For each reference density the number of independent integration paths
N_Gamma (from the singularity census) is compared with the dimension of the
solution space of the Schwinger-Dyson equations, read off as the corank of a
truncated linear system.  Doubling the truncation must not change the corank.

Run:  python demos/02_counting_paths.py
"""

from clpaths import corpus
from clpaths.sde_solver import dimension_check

print(f"{'density':10s} {'formula':>7s} {'N_SDE':>6s} {'listed':>6s}  coranks by n_max")
for e in corpus.entries():
    r = dimension_check(e.density)
    listed = "-" if e.stated is None else str(e.stated)
    print(f"{e.name:10s} {r['n_gamma']:7d} {r['n_sde']:6d} {listed:>6s}  "
          f"{r['corank_by_n_max']}   {e.description}")

# the periodic density has decay sectors at both ends of the cylinder,
# which is why its count is 4 rather than the value listed for it
