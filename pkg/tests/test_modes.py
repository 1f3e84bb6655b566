import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtpt.errors import DimensionMismatch, EdgeUndefined, ShapeMismatch, SignalBelowFloor
from dtpt.model import ModelConfig, assemble, sublattice_signs
from dtpt.modes import (
    analytic_edge_state,
    decay_matrix,
    diagonalize,
    edge_state,
    ipr,
    mode_labels,
    nu_scaling_fit,
    radiating_overlap,
)

PI = np.pi


def test_two_site_diagonalization():
    m = diagonalize(np.array([[0.0, 0.7], [0.7, 0.0]]))
    np.testing.assert_allclose(m.energies, [-0.7, 0.7])
    np.testing.assert_allclose(np.abs(m.vectors), np.full((2, 2), 2**-0.5))


def test_mode_labels_centre_on_zero():
    np.testing.assert_array_equal(mode_labels(5), [-2, -1, 0, 1, 2])
    np.testing.assert_array_equal(mode_labels(4, 1), [-1, 0, 1, 2])


@pytest.mark.parametrize("spacing", [0.25, 0.75])
def test_j0_zero_edge_state(spacing):
    cfg = ModelConfig(21, 0.0, 0.4, gamma0=1.0, spacing=spacing)
    c = assemble(cfg)
    modes = diagonalize(c)
    psi = modes.vectors[:, modes.zero_index]
    expected = np.zeros(21)
    expected[[0, 20]] = 2**-0.5
    assert abs(psi @ expected) == pytest.approx(1.0, abs=1e-12)
    assert ipr(psi) == pytest.approx(0.5, abs=1e-12)
    dm = decay_matrix(modes, c.gamma)
    assert dm.edge_decay == pytest.approx(2.0, abs=1e-12)
    ro = radiating_overlap(modes, cfg)
    assert ro.edge_decay(cfg.gamma0) == pytest.approx(2.0, abs=1e-10)


def test_quarter_spacing_gapped():
    for ratio in (0.05, 0.3, 1.0, 5.0):
        modes = diagonalize(assemble(ModelConfig(21, ratio, 0.1 * PI, spacing=0.25)))
        e = np.sort(np.abs(modes.energies))
        assert e[0] < 1e-12 and e[1] > 1e-3


def test_left_boundary_localization():
    modes = diagonalize(assemble(ModelConfig(21, 5.0, 0.1 * PI, spacing=0.25)))
    p = edge_state(modes).distribution
    assert int(np.argmax(p)) == 0


def test_monotone_left_weight_at_quarter():
    weights = []
    for j0 in np.linspace(0.05, 5.0, 60):
        modes = diagonalize(assemble(ModelConfig(21, j0, 0.1 * PI, spacing=0.25)))
        weights.append(edge_state(modes).distribution[0])
    assert np.all(np.diff(weights) >= -1e-12)


def test_delocalized_at_dtpt():
    modes = diagonalize(assemble(ModelConfig(21, 0.25, 0.1 * PI)))
    assert ipr(modes.vectors[:, modes.zero_index]) < 2.0 / 21


def test_even_chain_midgap_pair():
    modes = diagonalize(assemble(ModelConfig(20, 10.0, 0.3 * PI)))
    state = edge_state(modes)
    assert len(state.index) == 2
    a, b = modes.vectors[:, list(state.index)].T
    left, right = (a + b) / np.sqrt(2), (a - b) / np.sqrt(2)
    # one recombination sits on each boundary
    sides = sorted([np.sum(left[:10] ** 2), np.sum(right[:10] ** 2)])
    assert sides[0] < 0.05 and sides[1] > 0.95


def test_edge_undefined_without_chirality():
    with pytest.raises(EdgeUndefined):
        edge_state(diagonalize(assemble(ModelConfig(11, 0.3, 0.3, spacing=0.6))))


def test_ipr_examples():
    assert ipr(np.eye(5)[2]) == 1.0
    assert ipr(np.ones(8)) == pytest.approx(1 / 8)
    assert ipr(3 * np.ones(8)) == pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        ipr(np.zeros(3))


def test_decay_matrix_shape_check():
    modes = diagonalize(assemble(ModelConfig(5, 1.0, 0.3)))
    with pytest.raises(DimensionMismatch):
        decay_matrix(modes, np.eye(4))


def test_analytic_state_small():
    psi = analytic_edge_state(ModelConfig(3, 0.5, 1.1))
    np.testing.assert_allclose(psi, np.array([1, 0, 1]) / np.sqrt(2), atol=1e-15)
    with pytest.raises(ShapeMismatch):
        analytic_edge_state(ModelConfig(9, 0.5, 1.1))


def test_analytic_state_eleven():
    cfg = ModelConfig(11, 0.5, 0.3 * PI)
    t2 = np.tan(0.15 * PI) ** 2
    expected = np.zeros(11)
    expected[[0, 2]] = 1.0
    expected[[4, 6]] = -t2
    expected[[8, 10]] = t2**2
    expected /= np.linalg.norm(expected)
    np.testing.assert_allclose(analytic_edge_state(cfg), expected, atol=1e-15)
    c = assemble(cfg)
    modes = diagonalize(c)
    ro = radiating_overlap(modes, cfg)
    assert abs(ro.o_cos) < 1e-10 and abs(ro.o_sin) < 1e-10


def test_radiating_overlap_matches_decay_matrix():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = ModelConfig(int(rng.integers(3, 16)), rng.uniform(0, 2), rng.uniform(0, PI),
                          gamma0=rng.uniform(0.1, 2), spacing=rng.uniform(0.1, 1.2))
        c = assemble(cfg)
        modes = diagonalize(c)
        ro = radiating_overlap(modes, cfg)
        assert ro.edge_decay(cfg.gamma0) == pytest.approx(
            decay_matrix(modes, c.gamma).edge_decay, abs=1e-10 * cfg.gamma0)


def test_nu_fit_needs_odd_sizes():
    cfg = ModelConfig(11, 0.3, 0.3 * PI)
    with pytest.raises(ShapeMismatch):
        nu_scaling_fit(cfg, [11, 13, 15])
    with pytest.raises(ShapeMismatch):
        nu_scaling_fit(cfg, [10, 13, 15, 17])


def test_nu_fit_floor():
    # dissipationless analytic point: couplings vanish identically
    with pytest.raises(SignalBelowFloor) as info:
        nu_scaling_fit(ModelConfig(11, 0.5, 0.3 * PI), [11, 15, 19, 23])
    assert info.value.nu == float("inf")


def test_nu_fit_recovers_slope_over_long_chains():
    fit = nu_scaling_fit(ModelConfig(11, 0.252, 0.3 * PI), list(range(101, 202, 4)))
    assert fit.nu == pytest.approx(0.0115, abs=0.003)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 16),
    st.floats(0.0, 2.0),
    st.floats(0.0, PI),
    st.floats(0.05, 2.0),
    st.sampled_from([0.25, 0.75]),
)
def test_chiral_pairing_and_traces(n, j0, phi, gamma0, spacing):
    cfg = ModelConfig(n, j0, phi, gamma0=gamma0, spacing=spacing)
    c = assemble(cfg)
    modes = diagonalize(c)
    np.testing.assert_allclose(np.sort(modes.energies), np.sort(-modes.energies), atol=1e-10 * gamma0)
    s = sublattice_signs(n)
    for e, v in zip(modes.energies, modes.vectors.T):
        np.testing.assert_allclose(c.h @ (s * v), -e * (s * v), atol=1e-10 * max(gamma0, j0))
    dm = decay_matrix(modes, c.gamma)
    assert np.trace(dm.gamma_mn) == pytest.approx(n * gamma0, rel=1e-12)
    assert np.linalg.eigvalsh(dm.gamma_mn).min() >= -1e-10 * gamma0
    if n % 2:
        psi = modes.vectors[:, modes.zero_index]
        assert abs(modes.energies[modes.zero_index]) < 1e-12 * max(gamma0, j0, 1.0)
        assert np.max(np.abs(psi[1::2])) < 1e-8
