"""Smoke test for the paramp extension module.

Build and run from the repository root:

    cargo build --release -p paramp-py
    cp target/release/libparamp.so python/paramp.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import paramp  # noqa: E402


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    lam = 0.3
    closed = paramp.dpa_gain(lam)
    assert close(closed, ((0.25 + lam**2) / (0.25 - lam**2)) ** 2, 1e-12)
    assert paramp.parametric_threshold() == 0.5

    dpa = paramp.Coefficients(lam=lam)
    state = paramp.SteadyState(dpa)
    state.validate()
    assert state.converged
    assert state.xi() < 1e-3

    g, matrix = state.gain()
    assert close(g, closed, 0.02), (g, closed)
    assert len(matrix) == 2

    s_f, _ = state.squeezing()
    assert close(s_f, ((0.5 + lam) / (0.5 - lam)) ** 2, 0.01)

    added, eta = paramp.noise(g, dpa)
    assert close(eta, g / (2 * g - 1), 1e-3), (eta, g)

    x, p, w = state.wigner(points=81)
    norm = sum(map(sum, w)) * (x[1] - x[0]) * (p[1] - p[0])
    assert abs(norm - 1) < 1e-3, norm

    sts = paramp.circuit("sts_inductor", 80.0, 4.0, -math.pi / 2, 0.01, 12.0, l_ph=100.0)
    assert sts["kerr_free"]
    assert sts["cubic"] < 0

    assert paramp.fixed_points(0.0, 0.4, 0.0) == [0.0]
    _, _, counts = paramp.stability_map((0.3, 0.3), (0.4, 0.8), -2e-4, (1, 41))
    assert counts[0][0] == 2 and counts[0][-1] == 3

    print(f"paramp smoke test ok: G={g:.4f} (closed {closed:.4f}), S_f={s_f:.4f}, eta={eta:.4f}")


if __name__ == "__main__":
    main()
