"""Complex Langevin on (x - i)**2 exp(-1.6 x**2) and the two path functionals.

The density has a double zero at x = i, so two independent integration paths
run from the zero out to +infinity and -infinity.  A CL simulation converges
to some combination a_+ T_+ + a_- T_-; this script computes both functionals
by quadrature, runs CL, and fits the coefficients.

Run:  python demos/01_two_paths.py  (about half a minute)
"""

from clpaths import census, corpus
from clpaths.analysis import fit, sum_to_one, table1_text
from clpaths.contour import Exponential, Monomial, functional_table, real_line, spanning_paths
from clpaths.langevin import CLConfig, run

d = corpus.table1()
obs = [Monomial(1), Monomial(2), Monomial(3), Monomial(4),
       Exponential(-1), Exponential(1), Exponential(-2), Exponential(2)]

# the census finds one finite zero and two decay directions at infinity
c = census(d)
print("generalized zeroes:", [str(e) for e in c.generalized_zero_approaches], " N_Gamma =", c.n_gamma)

paths = spanning_paths(c)
tab = functional_table(d, paths, obs, normalize=True)
rho = functional_table(d, [real_line()], obs, normalize=True).values[0]
print("path normalizations (T, 1):", [f"{z:.4f}" for z in tab.norms])

# the real-line integral is itself a combination of the two path functionals
cfg = CLConfig(n_walkers=64, dt=1e-3, t_burn=20.0, t_measure=4000.0, seed=0)
res = run(d, obs, cfg)
labels = [o.label for o in obs]
recs = [res.record(lab) for lab in labels]
f = fit(recs, tab.values, parametrization=sum_to_one(2), covariance=res.covariance)

print()
print(table1_text(labels, recs, f.predict(tab.values), tab.values[0], tab.values[1], rho))
print()
for lab, a, e in zip(tab.path_labels, f.coefficients, f.errors):
    print(f"a[{lab}] = {a.real:.4f} {a.imag:+.4f}i  (+- {e.real:.1e}, {e.imag:.1e})")
print(f"chi2/dof = {f.chi2:.1f}/{f.dof};  CL wall time {res.diagnostics['runtime_s']:.0f} s")
