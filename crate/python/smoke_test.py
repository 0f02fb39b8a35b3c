"""Smoke test for the `lpfr` Python extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/lpfr-*.whl
"""

import math

import lpfr


def main():
    grid = lpfr.Grid(100)
    assert grid.n == 100 and abs(sum(grid.weights) - 1.0) < 1e-12

    mu0 = grid.named_density("bump(0.3,0.1)")
    mu1 = grid.named_density("bump(0.7,0.1)")
    assert abs(grid.integrate(mu0) - 1.0) < 1e-12

    assert lpfr.distance(mu0, mu0, 3.0) == 0.0
    assert lpfr.p_from_alpha(0.0) == 2.0 and lpfr.alpha_from_p(4.0) == 0.5

    # F_2 of a/mu = sin(2 pi x) against the uniform density is 1/sqrt(2).
    uniform = [1.0] * 400
    a = [math.sin(2 * math.pi * i / 399) for i in range(400)]
    assert abs(lpfr.fp_norm(uniform, a, 2.0) - math.sqrt(0.5)) < 1e-3

    dens = lpfr.dens_geodesic(mu0, mu1, 3.0, steps=11)
    assert len(dens) == 11 and dens.frames[0] == mu0

    alpha = lpfr.prob_alpha_geodesic(mu0, mu1, 2.0)
    lp = lpfr.prob_lp_geodesic(mu0, mu1, 2.0)
    assert lp.status == "converged", lp.status
    sup = max(
        abs(x - y)
        for fa, fl in zip(alpha.frames, lp.path.frames)
        for x, y in zip(fa, fl)
    )
    assert sup < 1e-2, sup

    exp = lpfr.dens_exp(uniform, [5 * v for v in a], 2.0, t_max=3.0)
    assert exp.left_space and exp.blowup_time is not None

    normal = lpfr.normal_geodesic((-2.0, 1.0), (2.0, 1.0), 2.0, connection="alpha")
    assert normal.miss < 1e-10 and max(normal.sigma) > 1.0

    nu = [0.8 + 0.5 * math.cos(3 * i / 99) for i in range(100)]
    ones = [1.0] * 100
    assert abs(lpfr.cartan_c(ones, nu, nu, a[:100], a[:100], 3.0)) < 1e-12
    assert lpfr.hessian_g(ones, nu, a[:100], a[:100], 3.0) > 0.0

    print(f"lpfr smoke test passed (p=2 alpha vs L^p sup difference {sup:.2e})")


if __name__ == "__main__":
    main()
