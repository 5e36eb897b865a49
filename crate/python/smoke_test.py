"""Smoke test for the Python bindings.

Build and install first, e.g. `pip install --no-build-isolation -e crates/python`
(needs maturin), then run `python python/smoke_test.py`.
"""

import math

import toric_ball as tb


def main():
    assert "p2" in tb.bundled_names()

    p2 = tb.Fan.bundled("p2")
    assert p2.dim == 2 and len(p2.cones) == 7 and p2.is_complete()
    assert p2.barycenter([0, 1]) == [1, 1]
    assert len(p2.flags()) == 6
    assert p2.ball_model() == (1, 0, 6)
    assert p2.orbit_complex() == (1, 1)

    p112 = tb.Fan(2, [[1, 0], [0, 1], [-1, -2]], [[0, 1], [1, 2], [0, 2]])
    assert sorted(p112.hilbert_basis([0, 2])) == [[0, -1], [1, -1], [2, -1]]

    atlas = tb.Atlas(p2)
    assert len(atlas) == 6
    chart = atlas.chart(0)
    assert set(chart) >= {"flag", "alpha", "c", "b", "psi"}
    w = [0.25, 0.75]
    back = atlas.psi_invert(0, atlas.psi_eval(0, w))
    assert max(abs(a - b) for a, b in zip(back, w)) < 1e-12
    carrier, values = atlas.param(0, [1.0, 0.0, 0.0])
    assert values == [1.0] * len(values) and carrier

    assert atlas.commutativity_residual(0, [0.5, 1.5]) < 1e-9
    assert atlas.commutativity_residual(0, [0.05, 0.1], delta=1) > 1e-3

    _, y = atlas.phi([1e-4, 2e-4])
    assert abs(y[0] - 1e-4 / (2 * math.pi)) < 1e-8

    u = [0.3, 2.0, 7.5]
    assert max(abs(a - b) for a, b in zip(tb.phi_flag_inverse(tb.phi_flag(u)), u)) < 1e-12

    report = tb.verify(p2, seed=3)
    assert report["passed"], [c["name"] for c in report["checks"] if not c["passed"]]
    bad = tb.verify(p2, perturb_b=True)
    assert not bad["passed"]
    assert any(c["name"] == "charts.commutativity" and not c["passed"] for c in bad["checks"])

    try:
        tb.Atlas(tb.Fan.bundled("quadrant"))
    except ValueError:
        pass
    else:
        raise AssertionError("incomplete fan accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
