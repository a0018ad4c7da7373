"""Smoke test for the contring_py extension module.

Build and stage the module first:

    cargo build -p contring-py --release
    cp target/release/libcontring_py.so python/contring_py.so
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import contring_py as c  # noqa: E402


def main():
    a = c.Mat.parse("p=2; 1 1 0; 0 1 0; 0 0 1")
    assert (a.p, a.n, a.rank()) == (2, 3, 3)
    assert a.rk() == (3, 3)
    assert c.Mat.parse("p=2; 0 0; 0 0").rk() == (0, 2)

    r = c.rcf(a)
    assert r["factors"] == [[1, 1], [1, 0, 1]] and r["index"] == 1
    assert c.index(a)["holds"]

    one = c.Mat.identity(2, 3)
    assert c.dist(a, one) == (1, 3)
    assert a * a.inverse() == one

    b = c.Mat(3, [[2, 1, 0], [0, 1, 1], [1, 0, 2]])
    z = c.Mat(3, [[0, 0, 0], [0, 1, 0], [0, 0, 2]])
    path = c.geodesic(b, z)
    assert path["verified"] and path["points"][0] == b.rows()

    u = c.unit_geodesic(c.Mat(3, [[2, 1], [0, 1]]))
    assert u["verified"]
    invol = c.Mat(5, [[0, 1], [1, 0]])
    assert c.star_geodesic(invol, [[-1, 0, 1]], 1)["verified"]

    mp = c.midpoint(c.Mat(5, [[1, 2], [0, 3]]), c.Mat(5, [[2, 0], [1, 1]]), seed=7)
    assert mp["within_bound"]

    d = c.decompose(c.Mat(3, [[2, 1, 0, 1], [0, 1, 2, 0], [0, 0, 2, 1], [0, 0, 0, 1]]), 2)
    assert d["verified"] and len(d["factors"]) == 2

    s = c.Mat(2, [[1, 1], [1, 1]])
    assert c.approx_unit(s).is_invertible()
    assert c.sl_project(c.Mat(3, [[2, 0], [0, 1]])).rows() == [[2, 0], [0, 2]]
    t = c.tower_density(c.Mat(2, [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 0]]), c.Mat(2, [[1, 1], [0, 1]]))
    assert t["trace"]["bound"]

    table = c.ClassTable(3, 2, special=True)
    assert (table.order, table.num_classes) == (168, 6)
    covered, _ = table.closure(table.auto_tuple("rs"))
    assert covered
    assert table.rodgers_saxl([1] * 13)["claim_holds"] in (True, None)
    assert len(table.center()) == 1

    try:
        c.sl_project(c.Mat(3, [[0, 0], [0, 0]]))
    except c.ContringError as e:
        assert "NotInvertible" in str(e)
    else:
        raise AssertionError("expected ContringError")

    code, out = c.run_cli(["rank", "--input", "p=2; 0 0 0; 0 0 0; 0 0 0"])
    assert code == 0 and json.loads(out)["den"] == 3

    rep = c.verify_suite(seed=1, only=[3, 10, 12])
    assert rep["passed"], rep
    print("smoke test passed")


if __name__ == "__main__":
    main()
