"""Quick check of the blochx Python module. Run after `maturin develop`."""

import math

import blochx


def close(a, b, tol=1e-10):
    return abs(a - b) < tol


g = blochx.GeneratorSet(3)
assert len(g) == 8
assert close(g.c_n, math.sqrt(3.0))
assert g.label(0).startswith("U")

h = 1 / math.sqrt(2)
plus = blochx.DensityState.from_ket([h, h])
r = plus.bloch_vector()
assert close(r.norm(), 1.0)
assert close(r.coords[0], 1.0)
assert r.is_state()[0]
back = r.to_state().matrix()
assert close(back[0][1].real, 0.5)

mixed = blochx.DensityState.maximally_mixed(3)
assert close(mixed.purity(), 1 / 3)

theta = 1.0
obs = blochx.SpinObservable(0.5, [0.0, 0.0, 1.0])
psi = blochx.DensityState.from_ket([math.cos(theta / 2), math.sin(theta / 2)])
p = obs.born_probabilities(psi)
t = obs.trace_probabilities(psi)
# eigenvalues ascend, so vertex 0 is spin down
assert close(p[1], math.cos(theta / 2) ** 2)
assert all(close(x, y) for x, y in zip(p, t))

report = obs.measure(psi, samples=20000, seed=3)
assert report["samples"] == 20000
assert report["max_dev"] < 0.02

up = obs.post_state(psi, 1)
# basis order is mu = s, s-1, ..., so spin up is the first amplitude
assert close(up.matrix()[0][0].real, 1.0)

pair = blochx.SpinObservable.composite(0.5, 0.5, [0.0, 0.0, 1.0], "coupled")
assert pair.degeneracy_groups == [[1], [0, 2], [3]]

v = blochx.space_vector(1.0, [0.0, 0.0, 1.0])
w = blochx.space_vector(1.0, [1.0, 0.0, 0.0])
assert close(v.norm(), 1.0)
assert close(v.dot(w), 0.0)
c = blochx.composite_space_vector(0.5, 1.0, [0.0, 1.0, 0.0], "product")
assert close(c.norm(), 1.0)

rep = blochx.verify("1", s=1.5, trials=10, seed=1)
assert rep["pass"], rep
rep = blochx.verify("2bis", s1=0.5, s2=1.0, trials=10, seed=1)
assert rep["pass"], rep

lo, hi = blochx.cone_projection_range(1.0, 1.0)
assert lo <= hi

try:
    blochx.SpinObservable(0.3)
except ValueError:
    pass
else:
    raise AssertionError("invalid spin accepted")

print("blochx", blochx.__version__, "smoke test ok")
