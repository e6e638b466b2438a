"""Smoke test for the scatterlab_py extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import math

import scatterlab_py as sl


def main():
    energies = sl.enumerate_window((0.0, 5.0))
    assert energies == sorted(energies) and energies, "energies must be sorted and nonempty"

    c0 = sl.c0()
    assert abs(c0 - 14.1057789306) < 1e-6, c0

    roots = sl.perturbed_spectrum((10.0, 12.0), phi=0.5)
    assert roots, "window should contain eigenvalues"
    for r in roots:
        assert r.n_left < r.lam < r.n_right
    gaps = [r.gap_index for r in roots]
    assert gaps == list(range(gaps[0], gaps[0] + len(gaps)))

    lam = roots[0].lam
    atoms = sl.momentum_measure(lam, lam ** (-1.0 / 16.0))
    total = sum(w for _, _, w in atoms)
    assert abs(total - 1.0) < 1e-12, total
    assert all(0.0 <= t <= math.pi and 0.0 <= p < 2 * math.pi for t, p, _ in atoms)
    assert 0.0 < sl.top_mass(lam, 0.5) <= 1.0

    r, limit = sl.pair_corr(100.0)
    assert abs(r / limit - 1.0) < 0.15, (r, limit)

    try:
        sl.perturbed_spectrum((1.0, 2.0), phi=4.0)
    except ValueError:
        pass
    else:
        raise AssertionError("phi outside (-pi, pi) must raise ValueError")

    print(f"smoke test ok: {len(energies)} energies, {len(roots)} roots, c0 = {c0:.10f}, R/limit = {r / limit:.4f}")


if __name__ == "__main__":
    main()
