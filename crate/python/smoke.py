"""Smoke test for the histopush extension module."""

import json
import math

import histopush as hp

h = hp.Histogram2D([[2.0, 1.0], [0.5, 0.5]])
assert h.n == 2
assert abs(sum(h.marginal_first()) - 2.0) < 1e-12

net, report = hp.build_phi(h, 0.1)
assert report["s"] == 4 and report["variant"] == "deep"
assert report["guarantee"] <= 0.1
assert (net.size, net.depth) == (report["size"], report["depth"])

ys = net.eval_many([0.0, 0.25, 0.5, 1.0])
assert all(0.0 <= c <= 1.0 + 1e-12 for y in ys for c in y)

base, brep = hp.build_phi(h, 0.1, variant="baseline")
assert brep["W"] is None
for x in [i / 50 for i in range(51)]:
    a, b = net.eval([x]), base.eval([x])
    assert max(abs(u - v) for u, v in zip(a, b)) < 1e-8

est = hp.estimate_w(h, net, r=4, m=500)
assert est["method"] == "exact" and est["lower"] <= report["guarantee"]

saw = hp.ReluNet.sawtooth(3)
assert saw.pieces()["zeta"] == 8
assert saw.pieces(exact=True)["zeta"] == 8
back = hp.ReluNet.from_json(net.to_json())
assert back.eval([0.3]) == net.eval([0.3])
assert json.loads(h.to_json())["n"] == 2

assert abs(hp.c_constant(2) - 1 / math.sqrt(2)) < 1e-15
assert abs(hp.zeta_cap(10, 2) - (6 * math.e) ** 2) < 1e-9
assert hp.choose_s(2, 0.1) == 4
assert hp.wasserstein1d([1.0, 1.0], [1.0, 1.0]) == 0.0

try:
    hp.Histogram2D([[1.0, -1.0], [1.0, 3.0]])
except ValueError:
    pass
else:
    raise AssertionError("negative weight accepted")

print("histopush smoke test passed")
