"""Smoke test for the orbitshift extension module."""

import json
import math

import orbitshift as os_


def main():
    circle = os_.Field.circle()
    assert circle.case == "NF3_NonDegenerate", circle.case
    assert circle.nabla == [[0.0, -2.0], [2.0, 0.0]]
    assert abs(circle.period(1.0, 0.0) - math.pi) < 1e-8

    x, y = circle.flow(1.0, 0.0, math.pi)
    assert abs(x - 1.0) < 1e-8 and abs(y) < 1e-8

    k2 = os_.Field.two_ellipses()
    assert k2.case == "NF1_ZeroLinear"
    thetas = [k2.period(*k2.ray_point(c, 0.0)) for c in (1.0, 0.1, 0.01)]
    assert thetas[0] < thetas[1] < thetas[2], thetas

    m = os_.Map.flow_shift("1/10 + x/20")
    levels, angles, values, branch = os_.recover_shift(circle, m, 16, 16)
    worst = 0.0
    for i, c in enumerate(levels):
        for j, phi in enumerate(angles):
            px, _ = circle.ray_point(c, phi)
            worst = max(worst, abs(values[i][j] - (0.1 + px / 20.0)))
    assert worst < 1e-6 and branch == 0, worst

    jet, _ = os_.jet_at_origin(os_.Map.flow_map(0.7), k2)
    assert os_.classify(jet)[0] == "Kernel", jet
    assert os_.classify([[1.0, 0.5], [0.0, 1.0]]) == ("APlus", 0.5)

    value, _ = os_.lie_derivative(circle, "x^2 + y^2", 0.3, 0.4)
    assert abs(value) < 1e-8

    a, b, inner, outer, _ = os_.fix_boundary(circle, "1/10 + x/20", 0.25, 0.75)
    assert (a, b) == (0.25, 0.75) and inner <= 1e-8 and outer <= 1e-10

    svg = os_.phase_portrait(circle, [0.25, 0.5, 0.75, 1.0])
    assert svg.count("<path") == 4

    summary = json.loads(os_.verify(seed=3))
    assert summary["passed"], [c["name"] for c in summary["checks"] if not c["pass"]]
    assert os_.verify(seed=3) == os_.verify(seed=3)
    print("smoke test passed:", len(summary["checks"]), "checks")


if __name__ == "__main__":
    main()
