"""Is the CL distribution stationary?

For a stationary distribution P(x, y) the probability current
j = (v_x P - dP/dx, v_y P) is divergence free, so its net flux through any
closed curve vanishes.  The check is applied to a complex Gaussian and, on the
cylinder, to the periodic two-component density, where horizontal lines around
the cylinder are closed curves too.

Run:  python demos/04_stationarity.py
"""

from clpaths import corpus
from clpaths.analysis import flux, random_curves
from clpaths.contour import Exponential, Monomial
from clpaths.langevin import CLConfig, run

for name, lines in (("complex-gaussian", []), ("periodic", [0.86, 0.89])):
    d = corpus.get(name)
    obs = [Exponential(1)] if d.is_cylinder else [Monomial(1)]
    cfg = CLConfig(n_walkers=32, dt=1e-3, t_burn=10.0, t_measure=1000.0, seed=1,
                   hist_bins=(120, 120))
    h = run(d, obs, cfg).histogram
    (x0, x1), (y0, y1) = h.bounds
    print(f"{name}: histogram x in [{x0:.2f}, {x1:.2f}], y in [{y0:.2f}, {y1:.2f}]")
    for k, c in enumerate(random_curves(h, d, 5, seed=2)):
        v, e = flux(h, d, curve=c)
        print(f"  polygon {k}: flux {v:+.2e} +- {e:.1e}")
    for y in lines:
        v, e = flux(h, d, y0=y)
        print(f"  line y={y}: flux {v:+.2e} +- {e:.1e}")
