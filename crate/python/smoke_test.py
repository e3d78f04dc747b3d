import json
import math

import resolvent_lab as rl

cayley = rl.GeneratorSpec.single_atom(0.0, 0.0, 1.0)
assert cayley.q == 1

sol = rl.solve(cayley, 1.0, 0.5)
assert abs(sol["w"] - 0.2) < 1e-12
assert abs(sol["g"] - 0.4) < 1e-12

b = rl.bounds(1.0, 0.025, 2.0)
assert abs(b["distortion"] - math.sqrt(2.0 / (2.2 + math.sqrt(1.6)))) < 1e-14

flat = rl.GeneratorSpec.constant(1.0)
assert abs(rl.solve(flat, 1.0, 0.5)["w"] - 0.25) < 1e-15
assert rl.GeneratorSpec.from_json(cayley.to_json()) == cayley

times, points = rl.integrate(flat, 0.5, 1.0)
assert times[-1] == 1.0
assert abs(points[-1] - 0.5 * math.exp(-1.0)) < 1e-9

_, _, gap = rl.product_formula(cayley, 0.5, 1.0, 64)
assert gap < 1e-2

report = json.loads(rl.run_suite("distortion", seed=7, config='{"generators": 3, "lambdas": 3}'))
assert report["seed"] == 7 and report["violations"] == []

try:
    rl.solve(cayley, 1.0, 1.5)
except ValueError:
    pass
else:
    raise AssertionError("point outside the disk accepted")

print("smoke test ok:", ", ".join(rl.suites()))
