"""Smoke test for the emscatter Python module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/emscatter-*.whl
"""

import math

import emscatter


def main():
    wave = emscatter.Wave.reference()
    assert abs(wave.k - 2 * math.pi / 6e-5) < 1e-6

    mesh = emscatter.Mesh.sphere(1e-9, m_phi=12)
    assert len(mesh) == 766
    assert abs(mesh.area - 4 * math.pi * 1e-18) < 1e-30

    sol = emscatter.solve_one_body(mesh, wave, tol=1e-12)
    qa = sol.q_asymptotic[2]
    qe = sol.q_exact[2]
    print(f"P={len(mesh)} Q_e,z={qe.imag:.4e}i Q_a,z={qa.imag:.4e}i its={sol.iterations}")
    assert abs(qa.imag - 0.376e-21) < 1e-3 * 0.376e-21

    report = sol.validate([(1e-6, 1e-6, 1e-6)])
    assert report["tangentiality_max"] < 1e-10
    assert report["q_exact_vs_asymptotic"] < 6e-2
    ex = sol.e_exact((1e-6, 1e-6, 1e-6))[0]
    assert abs(ex - complex(0.9945, 0.1045)) < 1e-4

    g = emscatter.Mesh.sphere(1e-9).gamma("local")
    assert abs(g[2][2].real - 1 / 6) < 5e-2

    layout = emscatter.Layout.lattice(27, 1e-7, 1e-9)
    res = emscatter.run_many_body(layout, wave)
    print(f"M={len(layout)} norm={res.norm:.4f} error={res.error_estimate:.4e}")
    assert abs(res.norm - 5.20) < 5e-3
    assert 0.5 < res.error_estimate / 8.16e-10 < 2.0

    try:
        emscatter.Mesh.cube(1e-7, n_per_face=1)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid cube accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
