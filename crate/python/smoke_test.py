"""Smoke test for the qfactor_py extension module."""

import math

import qfactor_py as q


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert q.pi(10**6) == 78498
    oracle = q.PiOracle(10**5)
    assert oracle.pi(10**5) == 9592 and oracle.is_prime(99991)

    assert close(q.li(1e6), 78627.549159, 1e-5)
    assert close(q.riemann_r(1e6), 78527.399429, 1e-5)
    m = q.kummer_m(0.5, 1.5, -1.0)
    assert close(m.real, math.sqrt(math.pi) / 2 * math.erf(1.0), 1e-13)
    u = q.tricomi_u(0.5, 1.5, 2.0)
    assert close(u.real, 2.0**-0.5, 1e-12)

    f = q.Ensemble(304)
    assert len(f) == 6027 and f.n == 4012009
    assert (1019, 3947) in f
    assert f.energy(1019, 3947) == (93708, 92416)

    ctx = f.context(4021993)
    assert ctx.invert(93708) == (1019, 3947)

    fit = f.fit()
    assert close(fit.alpha1, 2.2904, 1e-4) and close(fit.alpha2, 1.2418, 1e-4)
    assert fit.mode == "empirical"
    rows = fit.series(200)
    assert rows[0][0] == 2 and len(rows) == 46

    ctx62 = q.Ensemble(62).context(85849)
    roots = ctx62.scan_eigenvalues()
    assert len(roots) == 1 and close(roots[0][0], 0.6080519963, 1e-8)
    qc = ctx62.quantum_condition(roots[0][0])
    assert close(qc.real, 1.0, 1e-8) and abs(qc.imag) < 1e-8

    try:
        f.energy(2, 2)
    except LookupError:
        pass
    else:
        raise AssertionError("expected LookupError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
