"""Smoke test for the gausshcrb_py extension module."""

import math

import gausshcrb_py as g


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    p = g.ModelPoint("single", 0.5, theta1=0.3, theta2=-0.2)
    assert p.model == "single" and p.r == 0.5

    q = g.qfi_matrix(p)
    close(q[0][0], 4 * math.exp(-1.0), 1e-12)
    close(q[1][1], 4 * math.exp(1.0), 1e-12)
    close(q[2][2], 2.0, 1e-12)
    inv = 1 / q[0][0] + 1 / q[1][1] + 1 / q[2][2]
    close(g.sld_crb(p), inv, 1e-12)

    close(g.heterodyne_precision(2.0), 14.672426, 1e-5)
    z, f = g.optimal_gendyne(0.0)
    close(z, 1.0, 1e-6)
    close(f, 0.5, 1e-10)

    rep = g.bounds_report(p, restarts=4, tol=1e-8)
    assert rep.c_s <= rep.c_h + 1e-9 <= 2 * rep.c_s + 2e-9
    close(rep.c_h, rep.c_h_closed, 1e-6)
    assert 0.0 <= rep.r_quantumness <= 1.0

    value, args = g.minimize_h(p, restarts=4, tol=1e-8)
    close(g.h_value("single", 0.5, args), value, 1e-8)
    close(g.locally_unbiased_residual(p, args), 0.0, 1e-12)

    two = g.ModelPoint("two", 0.5)
    close(g.quantumness(two), 1 / math.cosh(1.0), 1e-12)
    assert g.bs_factorization_check(two, trunc=120) < 1e-6

    try:
        g.ModelPoint("single", -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative r accepted")

    print("smoke test OK")


if __name__ == "__main__":
    main()
