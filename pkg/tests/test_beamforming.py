import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanetsim.beamforming import (
    SPEED_OF_LIGHT,
    BeamPattern,
    UpaConfig,
    array_response,
    beam_weights,
    element_position,
    full_beam,
    link_gain,
    make_beam,
    power_normalized_gain,
    steered_response,
    steering_vector,
    upa_shape,
    wave_vector,
)
from fanetsim.geometry import reciprocal_angles

SIZES = (1, 4, 8, 16, 32, 64)
azimuths = st.floats(-math.pi, math.pi, exclude_max=True)
elevations = st.floats(-math.pi / 2, math.pi / 2)


def cfg_for(m, wavelength=0.0107):
    return UpaConfig(*upa_shape(m), wavelength=wavelength)


def test_first_element_at_origin():
    for m in SIZES:
        assert np.array_equal(element_position(1, cfg_for(m)), np.zeros(3))


def test_second_element_along_y():
    cfg = UpaConfig(m_h=2, m_v=2, d_h=0.5, wavelength=0.0107)
    np.testing.assert_allclose(element_position(2, cfg), [0.0, 0.5 * 0.0107, 0.0], rtol=0, atol=1e-18)


def test_element_index_map():
    cfg = UpaConfig(4, 4)
    i, j = cfg.element_indices()
    for l in range(1, 17):
        assert (i[l - 1], j[l - 1]) == ((l - 1) % 4, (l - 1) // 4)
    assert (i[-1], j[-1]) == (3, 3)
    with pytest.raises(IndexError):
        element_position(17, cfg)


def test_rectangular_index_map_uses_horizontal_count():
    cfg = UpaConfig(4, 2, wavelength=1.0)
    pos = cfg.element_positions()
    assert pos[:, 1].max() == pytest.approx(1.5)  # three half-wavelength steps along y
    assert pos[:, 2].max() == pytest.approx(0.5)


@pytest.mark.parametrize("m, shape", [(1, (1, 1)), (4, (2, 2)), (8, (4, 2)), (16, (4, 4)),
                                      (32, (8, 4)), (64, (8, 8))])
def test_upa_shape(m, shape):
    assert upa_shape(m) == shape


def test_wave_vector_examples():
    lam = 0.01
    k = 2 * math.pi / lam
    np.testing.assert_allclose(wave_vector(0, 0, lam), [k, 0, 0])
    np.testing.assert_allclose(wave_vector(math.pi / 2, 0, lam), [0, k, 0], atol=1e-9)


def test_single_element_steering():
    assert np.array_equal(steering_vector(0.7, -0.2, UpaConfig(1, 1)), np.array([1.0 + 0j]))


def test_boresight_steering_is_all_ones():
    for m in SIZES:
        a = steering_vector(0.0, 0.0, cfg_for(m))
        np.testing.assert_allclose(a, np.ones(m), atol=0)


def test_make_beam_examples():
    cfg = UpaConfig(4, 4)
    one = make_beam(cfg, 1, 1)
    assert one.n_active == 1
    assert full_beam(cfg).mask.all()
    b = make_beam(cfg, 1, 2)
    assert b.n_active == 2
    i, j = cfg.element_indices()
    on = b.stacked.astype(bool)
    assert set(i[on]) == {0, 1} and set(j[on]) == {0}


def test_beam_validation():
    cfg = UpaConfig(4, 4)
    with pytest.raises(ValueError):
        make_beam(cfg, 0, 1)
    with pytest.raises(ValueError):
        make_beam(cfg, 5, 1)
    with pytest.raises(ValueError):
        BeamPattern(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        BeamPattern(np.full((2, 2), 2))
    with pytest.raises(ValueError):
        beam_weights(make_beam(UpaConfig(2, 2), 1, 1), cfg, 0, 0)


def test_boresight_response_is_coherent_sum():
    cfg = UpaConfig(4, 4)
    assert array_response(0.0, 0.0, np.ones(16), cfg) == pytest.approx(16.0, abs=1e-12)


def test_single_active_element_response():
    cfg = UpaConfig(4, 4)
    rng = np.random.default_rng(0)
    for az, el in rng.uniform(-1.5, 1.5, size=(20, 2)):
        assert array_response(az, el, make_beam(cfg, 1, 1), cfg) == pytest.approx(1.0, abs=1e-12)


def test_two_element_null():
    # |1 + exp(j pi)| = 0 where the half-wavelength pair is end-on
    cfg = UpaConfig(2, 1, d_h=0.5, wavelength=SPEED_OF_LIGHT / 28e9)
    assert array_response(math.pi / 2, 0.0, np.ones(2), cfg) < 1e-9


def test_link_gain_examples():
    cfg = UpaConfig(4, 4)
    az, el = 0.3, 0.1
    raz, rel = reciprocal_angles(az, el)
    w_tx = beam_weights(full_beam(cfg), cfg, az, el)
    w_rx = beam_weights(full_beam(cfg), cfg, raz, rel)
    assert link_gain((az, el), (raz, rel), w_tx, w_rx, cfg) == pytest.approx(16.0, rel=1e-12)
    one = UpaConfig(1, 1)
    assert link_gain((1.0, 0.2), (0.1, -0.4), np.ones(1), np.ones(1), one) == pytest.approx(1.0)


def test_link_gain_in_a_null():
    cfg = UpaConfig(2, 1, d_h=0.5)
    g = link_gain((math.pi / 2, 0.0), (0.0, 0.0), np.ones(2), np.ones(2), cfg)
    assert g < 1e-9


@pytest.mark.parametrize("m", SIZES)
def test_full_alignment_gain_equals_m(m):
    cfg = cfg_for(m)
    rng = np.random.default_rng(m)
    for az, el in rng.uniform([-math.pi, -1.2], [math.pi, 1.2], size=(10, 2)):
        raz, rel = reciprocal_angles(az, el)
        g = link_gain((az, el), (raz, rel), beam_weights(full_beam(cfg), cfg, az, el),
                      beam_weights(full_beam(cfg), cfg, raz, rel), cfg)
        assert abs(g / m - 1.0) < 1e-9


def test_normalized_gain_is_one_at_alignment():
    for m in SIZES:
        b = full_beam(cfg_for(m))
        assert power_normalized_gain(float(m), b, b) == pytest.approx(1.0)


@settings(max_examples=60)
@given(azimuths, elevations, st.sampled_from(SIZES))
def test_steering_entries_unit_modulus(az, el, m):
    a = steering_vector(az, el, cfg_for(m))
    assert np.max(np.abs(np.abs(a) - 1.0)) < 1e-12
    assert np.sum(np.abs(a) ** 2) == pytest.approx(m)


@settings(max_examples=60)
@given(azimuths, elevations)
def test_wave_vector_norm(az, el):
    lam = 0.0107
    assert np.linalg.norm(wave_vector(az, el, lam)) == pytest.approx(2 * math.pi / lam)


@settings(max_examples=60)
@given(azimuths, elevations, azimuths, elevations, st.integers(1, 4), st.integers(1, 4))
def test_response_bounded_by_active_count(az, el, aaz, ael, rows, cols):
    cfg = UpaConfig(4, 4)
    beam = make_beam(cfg, cols, rows)
    r = array_response(az, el, beam_weights(beam, cfg, aaz, ael), cfg)
    assert 0.0 <= r <= beam.n_active + 1e-9


@settings(max_examples=60)
@given(azimuths, elevations, azimuths, elevations, st.integers(1, 4), st.integers(1, 4))
def test_fast_response_matches_element_sum(az, el, aaz, ael, rows, cols):
    cfg = UpaConfig(4, 4)
    beam = make_beam(cfg, cols, rows)
    direct = array_response(az, el, beam_weights(beam, cfg, aaz, ael), cfg)
    assert steered_response(az, el, aaz, ael, beam, cfg) == pytest.approx(direct, abs=1e-9)


def test_fast_response_general_mask():
    cfg = UpaConfig(4, 4)
    mask = np.zeros((4, 4), dtype=int)
    mask[[0, 2, 3], [1, 1, 3]] = 1
    beam = BeamPattern(mask)
    rng = np.random.default_rng(5)
    for az, el, aaz, ael in rng.uniform(-1.5, 1.5, size=(20, 4)):
        direct = array_response(az, el, beam_weights(beam, cfg, aaz, ael), cfg)
        assert float(steered_response(az, el, aaz, ael, beam, cfg)) == pytest.approx(direct, abs=1e-9)


def test_widening_trades_peak_for_coverage():
    cfg = UpaConfig(4, 4)
    az = np.linspace(-math.pi, math.pi, 361)
    el = np.linspace(-1.4, 1.4, 71)
    A, E = np.meshgrid(az, el)
    off_axis = np.arccos(np.cos(A) * np.cos(E)) > math.radians(40)
    peaks, far = [], []
    for size in (4, 2, 1):  # nested leading blocks, narrowest first
        beam = make_beam(cfg, size, size)
        g = steered_response(A, E, 0.0, 0.0, beam, cfg) / math.sqrt(beam.n_active)
        peaks.append(g.max())
        far.append(np.mean(g[off_axis] ** 2))
    assert peaks[0] >= peaks[1] >= peaks[2]
    assert far[0] <= far[1] <= far[2]
