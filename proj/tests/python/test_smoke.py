import hashlib
import math
from pathlib import Path

import numpy as np
import pytest

import breather_lab as bl


def test_version_string():
    assert bl.__version__.count(".") == 2


def test_free_spectrum_matches_sine_table():
    mesh = 64
    values = np.asarray(bl.eigenvalues_below(1, 1, mesh, b=400.0))
    h = 1.0 / mesh
    k = np.arange(1, len(values) + 1)
    expected = 4.0 / h**2 * np.sin(k * math.pi * h / 2) ** 2
    np.testing.assert_allclose(values, expected, rtol=1e-10)
    assert bl.count_below(1, 1, mesh, sigma=400.0) == len(values)


def test_sampling_is_deterministic_and_in_range():
    a = bl.sample_omega(2, 3, seed=bl.derive_seed(7, 1))
    b = bl.sample_omega(2, 3, seed=bl.derive_seed(7, 1))
    assert a.shape == (9,)
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0.1) & (a <= 0.4))


def test_potential_raises_the_spectrum():
    omega = bl.sample_omega(1, 3, seed=11)
    v = bl.potential_on_grid(omega, 1, 3, 16, "cube")
    assert set(np.unique(v)) <= {0.0, 1.0}
    assert len(bl.grid_points(1, 3, 16)) == len(v)
    free = bl.eigenvalues_below(1, 3, 16, b=20.0)
    loaded = bl.eigenvalues_below(1, 3, 16, potential=v, b=21.0)
    for f, l in zip(free, loaded):
        assert l >= f - 1e-9
        assert l <= f + 1.0 + 1e-9


def test_weyl_bound_on_random_potential():
    omega = bl.sample_omega(1, 5, seed=3)
    v = bl.potential_on_grid(omega, 1, 5, 32, "ball")
    for n, e in enumerate(bl.eigenvalues_below(1, 5, 32, potential=v, b=100.0), start=1):
        assert e >= bl.weyl_lower_bound(n, 5.0, 1)


def test_spectral_shift_example():
    points, values = bl.spectral_shift([1.0, 3.0], [2.0, 4.0], 2, math.inf)
    assert list(points) == [1.0, 2.0, 3.0, 4.0]
    assert list(values) == [1, 0, 1, 0]


def test_constants():
    assert bl.k1_constant(1) == 128.0
    assert bl.wegner_constant(1, 0.0) == pytest.approx(2 * 32 * (2 * 2 + 2))
    assert bl.delta_from_epsilon(bl.epsilon_max(0.5, 1.0, 0.4), 0.5, 1.0) == pytest.approx(0.1)
    assert bl.ft_eval(1.0, 1, 1.0) == pytest.approx(math.e - 2)


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError, match="ω₊ < 1/2"):
        bl.validate_config("[model]\nomega_plus = 0.6\n[experiment]\nkind = \"spectrum\"\n")
    with pytest.raises(bl.ConfigError, match="epsilonn"):
        bl.validate_config("[experiment]\nepsilonn = 1\n")


def test_run_experiment_writes_manifest(tmp_path: Path):
    config = "[model]\nshape = \"none\"\n[grid]\nL = 1\nmesh_per_unit = 32\n"
    files = bl.run_experiment(config, kind="spectrum", out_dir=str(tmp_path))
    assert "manifest.json" in files
    csv = (tmp_path / "spectrum.csv").read_bytes()
    assert bl.sha256_hex(csv) == hashlib.sha256(csv).hexdigest()
