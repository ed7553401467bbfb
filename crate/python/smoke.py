"""Build with `maturin develop -m crates/python/Cargo.toml`, then run this file."""

import tlfacp

I4 = {
    "Aplus": [[0, None]],
    "Aminus": [[None, 0]],
    "C": [[0, 1]],
    "muPlus": [2],
    "muMinus": [1, 1],
}

report = tlfacp.solve(I4)
assert report["status"]["kind"] == "LocalOptimum", report
assert report["x"] == [0, -1], report
assert report["value"] == 1, report

for method in ("tree", "mincut"):
    assert tlfacp.solve(I4, method=method)["value"] == 1

assert tlfacp.evaluate(I4, [0, 0]) == {"value": 2, "feasible": True}
assert tlfacp.global_optimum(I4)["value"] == 1

try:
    tlfacp.evaluate(I4, [0, None])
except ValueError as e:
    print("undefined objective rejected:", e)
else:
    raise AssertionError("expected ValueError")

print("x =", report["x"], "value =", report["value"])
