"""Exercises the Python bindings end to end.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/abg_finsler_py-*.whl
"""

import json

import numpy as np

import abg_finsler_py as abg

X = [0.1, -0.2, 0.15]
Y = [1.0, 0.3, -0.4]


def main() -> None:
    names = abg.fixture_names()
    assert "euclidean_parallel_closed" in names, names

    for fixture in names:
        for kernel in ("unit", "exp_gamma", "randers3"):
            g, det, ginv = abg.fundamental_tensor(fixture, kernel, X, Y)
            g, ginv = np.array(g), np.array(ginv)
            oracle = np.array(abg.fundamental_tensor_oracle(fixture, kernel, X, Y))
            assert np.max(np.abs(g - oracle)) < 1e-9, (fixture, kernel)
            assert abs(det - np.linalg.det(g)) < 1e-8 * max(1.0, abs(det))
            assert np.max(np.abs(g @ ginv - np.eye(3))) < 1e-8

            c = np.array(abg.cartan_tensor(fixture, kernel, X, Y))
            assert np.allclose(c, c.transpose(1, 0, 2), atol=1e-12)
            assert np.max(np.abs(c @ np.array(Y))) < 1e-9

            closed = np.array(abg.spray(fixture, kernel, X, Y))
            direct = np.array(abg.spray_oracle(fixture, kernel, X, Y))
            assert np.max(np.abs(closed - direct)) < 1e-7, (fixture, kernel)

    # gamma closed and parallel gives a projective spray; a non-closed gamma does not
    residual, _ = abg.hamel("euclidean_parallel_closed", "exp_gamma", X, Y)
    assert max(abs(v) for v in residual) < 1e-7
    residual, _ = abg.hamel("euclidean_nonclosed", "exp_gamma", X, Y)
    assert max(abs(v) for v in residual) > 1e-3

    assert abg.douglas_norm("euclidean_parallel_closed", "exp_gamma", X, Y) < 1e-6
    assert abg.douglas_norm("euclidean_nonclosed", "exp_gamma", X, Y) > 1e-3

    assert abg.admissible("exp_gamma")
    assert abg.admissible('{"family": "exp_gamma", "b0": 1.1}')
    assert not abg.admissible('{"family": "exp_gamma", "b0": 1.12}')

    config = json.dumps(
        {
            "dimension": 2,
            "fields": {"fixture": "euclidean_parallel_closed"},
            "kernel": {"family": "exp_gamma"},
            "sample": {"points": 2, "directions": 2, "seed": 5},
        }
    )
    report = json.loads(abg.run(config, "verify-all"))
    assert report["summary"]["failures"] == 0, report["summary"]
    assert report["verdicts"]["flat"] == "flat", report["verdicts"]

    try:
        abg.spray("no_such_fixture", "unit", X, Y)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown fixture accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
