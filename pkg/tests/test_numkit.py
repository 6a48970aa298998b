import math
import os

import numpy as np
import pytest

from lmlab import numkit


def test_rng_algorithm_name():
    assert numkit.RNG_ALGORITHM == "philox4x64"


def test_make_rng_reproducible():
    a = numkit.make_rng(42).standard_normal(8)
    b = numkit.make_rng(42).standard_normal(8)
    assert a.tobytes() == b.tobytes()


def test_spawn_rngs_independent_and_stable():
    one = [r.standard_normal(4) for r in numkit.spawn_rngs(5, 3)]
    two = [r.standard_normal(4) for r in numkit.spawn_rngs(5, 3)]
    for x, y in zip(one, two):
        assert x.tobytes() == y.tobytes()
    assert not np.array_equal(one[0], one[1])


def test_inner_real_example():
    assert numkit.inner(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0


def test_inner_conjugates_first_argument():
    u = np.array([1.0 + 2.0j, 0.5j])
    v = np.array([2.0 - 1.0j, 3.0])
    got = numkit.inner(u, v)
    assert abs(got - np.vdot(u, v)) < 1e-14
    swapped = numkit.inner(v, u)
    assert abs(got - np.conj(swapped)) < 1e-14


def test_norm_complex():
    v = np.array([3.0 + 4.0j])
    assert abs(numkit.norm(v) - 5.0) < 1e-15


def test_matmul_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        numkit.matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_complex_matches_numpy():
    rng = numkit.make_rng(3)
    a = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    b = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    assert np.max(np.abs(numkit.matmul(a, b) - a @ b)) < 1e-12


def test_matvec_shapes():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    v = np.array([1.0, 1.0])
    out = numkit.matvec(a, v)
    assert out.shape == (2,)
    assert np.array_equal(out, np.array([3.0, 7.0]))


def test_polarization_identity_many_pairs():
    rng = numkit.make_rng(17)
    worst = 0.0
    for _ in range(1000):
        u = rng.standard_normal(8)
        v = rng.standard_normal(8)
        worst = max(worst, abs(numkit.polarization_inner(u, v) - numkit.inner(u, v)))
    assert worst <= 1e-12


def test_polarization_rejects_complex():
    with pytest.raises(ValueError):
        numkit.polarization_inner(np.array([1.0j]), np.array([1.0j]))


def test_random_unit_vectors_normalized_and_reproducible():
    a = numkit.random_unit_vectors(numkit.make_rng(9), 20, 7)
    b = numkit.random_unit_vectors(numkit.make_rng(9), 20, 7)
    assert a.tobytes() == b.tobytes()
    norms = np.linalg.norm(a, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_random_unit_vectors_dim_one_is_sign():
    v = numkit.random_unit_vectors(numkit.make_rng(1), 50, 1)
    assert set(np.unique(v)).issubset({-1.0, 1.0})


def test_field_of():
    assert numkit.field_of(np.array([1.0])) == "real"
    assert numkit.field_of(np.array([1.0 + 0j])) == "complex"


def test_csv_round_trip_exact(tmp_path):
    rng = numkit.make_rng(2)
    a = rng.standard_normal((5, 3)) * 1e-7
    path = os.path.join(tmp_path, "m.csv")
    numkit.save_matrix_csv(path, a)
    b = numkit.load_matrix_csv(path)
    assert a.tobytes() == b.tobytes()


def test_bin_round_trip_exact(tmp_path):
    rng = numkit.make_rng(4)
    a = rng.standard_normal((6, 2))
    path = os.path.join(tmp_path, "m.bin")
    numkit.save_matrix_bin(path, a)
    b = numkit.load_matrix_bin(path)
    assert a.tobytes() == b.tobytes()
    assert a.shape == b.shape


def test_frob_norm():
    m = np.array([[3.0, 0.0], [0.0, 4.0]])
    assert abs(numkit.frob_norm(m) - 5.0) < 1e-15


def test_inner_associativity_scale():
    # floating sums reassociate only within small tolerances
    rng = numkit.make_rng(8)
    u = rng.standard_normal(100)
    v = rng.standard_normal(100)
    assert abs(numkit.inner(u, v) - float(np.dot(u, v))) < 1e-9
