"""Smoke test for the pywcop extension module.

Build the module first (see the README), then run
    python3 python/smoke_test.py
with the directory holding pywcop.so on PYTHONPATH.
"""

import math

import pywcop


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


one = pywcop.Function("1")
z = pywcop.SelfMap("z")
half = pywcop.SelfMap("mul(0.5, z)")

close(abs(half(0.5 + 0.5j) - (0.25 + 0.25j)), 0.0, 1e-15)
close(pywcop.Function("z").hardy_norm(2), 1.0, 1e-12)
close(pywcop.Function("poly(1, 1)").hardy_norm("inf"), 2.0, 1e-9)
coeffs = pywcop.Function("kernel(0.5)").taylor(3)
close(abs(coeffs[1] - 0.75), 0.0, 1e-10)

for a in (0.0, 0.5, 0.9j, -0.99):
    close(pywcop.kernel_integral(one, z, 2, 2, a), 1.0, 1e-8)
r = 0.7
close(pywcop.kernel_integral(one, z, 2, 4, r), (1 + r * r) / (1 - r * r), 1e-7)

b = pywcop.truncation_bracket(one, half, degree=64, schedule=[8, 16, 32])
close(b["upper"], 1 / 64, 1e-9)

report = pywcop.analyze(one, half, 2, math.inf)
assert report["regime"] == "p->inf", report["regime"]
assert report["compact"], report

s = pywcop.Scenario.parse("name = id\nphi = z\np = 2\nq = 4\n")
assert (s.name, s.p, s.q) == ("id", "2", "4")
code, r = s.run("essnorm")
assert code == 1 and r["status"] == "unbounded", (code, r["status"])

try:
    pywcop.SelfMap("add(1, z)")
except pywcop.WcopError as e:
    assert "self-map" in str(e)
else:
    raise AssertionError("add(1, z) is not a self-map")

try:
    pywcop.Function("frob(z)")
except pywcop.WcopError:
    pass
else:
    raise AssertionError("unknown function name accepted")

t = pywcop.selftest([3])
assert t["passed"] == 1 and t["failed"] == 0, t

print("pywcop", pywcop.__version__, "smoke test passed")
