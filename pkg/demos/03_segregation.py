"""A real zero splits the real line.

For rho = (x - a) exp(-x**2/2) with real a the drift 1/(x - a) - x repels
walkers from x = a, so a real CL process never crosses it.  Runs started on
either side reproduce the one-sided path integrals from a to +-infinity,
not the full-line expectation values.

Run:  python demos/03_segregation.py  (about twenty seconds)
"""

import math

from clpaths import corpus
from clpaths.contour import (Exponential, FiniteZero, InfinityRay, Monomial, PathSpec,
                             functional_table, real_line)
from clpaths.langevin import CLConfig, run

a = 0.5
d = corpus.shifted_gaussian(a)
obs = [Monomial(1), Monomial(2), Exponential(1)]
full = functional_table(d, [real_line()], obs, normalize=True).values[0]

for side, end in ((+1, InfinityRay(0.0)), (-1, InfinityRay(math.pi))):
    oracle = functional_table(d, [PathSpec.open(FiniteZero(a), end)], obs,
                              normalize=True).values[0]
    cfg = CLConfig(n_walkers=16, dt=1e-3, t_burn=5.0, t_measure=400.0, seed=1,
                   dt_cap_factor=0.01, start_points=(a + side,))
    r = run(d, obs, cfg)
    xs = [x for x, _ in r.diagnostics["final_points"]]
    print(f"start {a + side:+.1f}: final x in [{min(xs):.2f}, {max(xs):.2f}], "
          f"{r.diagnostics['rejected_steps']} rejected steps")
    for rec, o, f in zip(r.records, oracle, full):
        print(f"  {rec.label:6s} CL {rec.mean.real:+.4f}{rec.mean.imag:+.4f}i "
              f"(+- {abs(rec.err):.4f})   one-sided {o.real:+.4f}{o.imag:+.4f}i   "
              f"full line {f.real:+.4f}{f.imag:+.4f}i")
