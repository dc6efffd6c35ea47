import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anttenna.errors import ValidationError
from anttenna.geometry import (
    C0,
    DipoleSpec,
    TorusSpec,
    discretize_dipole,
    discretize_torus,
    ring_segments,
    thin_wire_check,
)


def rot_z(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_inscribed_square():
    segs = ring_segments(1.0, 0.01, 4)
    assert len(segs) == 4
    assert segs.lengths == pytest.approx([2 * math.sin(math.pi / 4)] * 4, abs=1e-12)
    assert segs.lengths[0] == pytest.approx(1.41421, abs=1e-5)


def test_torus_below_minimum_segments_rejected():
    with pytest.raises(ValidationError, match="num_segments"):
        discretize_torus(TorusSpec(1.0, 0.01, 4))


def test_chord_sum_n64():
    segs = discretize_torus(TorusSpec(0.05, 0.001, 64))
    assert segs.total_length == pytest.approx(0.314033, abs=5e-7)
    assert segs.total_length == pytest.approx(64 * 2 * 0.05 * math.sin(math.pi / 64), rel=1e-12)
    assert segs.closed


def test_torus_spec_rejects_each_violation():
    with pytest.raises(ValidationError) as info:
        TorusSpec(major_radius=-1, wire_radius=0, num_segments=4).validate()
    assert len(info.value.problems) == 3
    with pytest.raises(ValidationError, match="feed_index"):
        TorusSpec(feed_index=64).validate()
    with pytest.raises(ValidationError, match="major_radius/10"):
        TorusSpec(0.02, 0.002).validate()


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.001, 10), n=st.integers(8, 200), frac=st.floats(0.001, 0.099))
def test_torus_invariants(r, n, frac):
    segs = discretize_torus(TorusSpec(r, r * frac, n))
    # closure is bitwise: segments share node arrays
    assert np.array_equal(segs[n - 1].end, segs[0].start)
    for k in range(n):
        assert segs[k].end is segs[(k + 1) % n].start
        assert abs(np.linalg.norm(segs[k].tangent) - 1) <= 1e-12
        assert abs(segs[k].length - np.linalg.norm(segs[k].end - segs[k].start)) <= 1e-12
    assert np.allclose(np.linalg.norm(segs.starts[:, :2], axis=1), r, rtol=1e-14)
    assert np.all(segs.starts[:, 2] == 0)
    assert segs.total_length == pytest.approx(n * 2 * r * math.sin(math.pi / n), rel=1e-12)


@pytest.mark.parametrize("n", [8, 13, 64])
def test_rotational_symmetry(n):
    segs = discretize_torus(TorusSpec(0.02, 0.001, n))
    rot = rot_z(2 * math.pi / n)
    for k in range(n):
        j = (k + 1) % n
        assert np.allclose(rot @ segs[k].start, segs[j].start, atol=1e-12 * 0.02)
        assert np.allclose(rot @ segs[k].end, segs[j].end, atol=1e-12 * 0.02)


def test_feed_segment_centred_on_plus_x():
    segs = discretize_torus(TorusSpec())
    c = segs[0].center
    assert c[1] == pytest.approx(0.0, abs=1e-18)
    assert c[0] > 0


def test_dipole_partition():
    segs = discretize_dipole(DipoleSpec(1.0, 0.001, 5))
    assert len(segs) == 5 and segs.feed_index == 2 and not segs.closed
    assert segs.lengths == pytest.approx([0.2] * 5, abs=1e-12)


def test_dipole_single_segment():
    segs = discretize_dipole(DipoleSpec(0.5, 0.001, 1))
    assert len(segs) == 1 and segs.feed_index == 0
    assert segs[0].length == pytest.approx(0.5)


def test_dipole_half_wave_segment_length():
    lam = C0 / 300e6
    segs = discretize_dipole(DipoleSpec(0.5, 0.001, 41))
    assert segs[0].length == pytest.approx(0.012195, abs=5e-7)
    assert 0.5 == pytest.approx(0.5 * lam, rel=1e-3)


@pytest.mark.parametrize("n", [1, 3, 41, 81])
def test_dipole_endpoints_exact(n):
    segs = discretize_dipole(DipoleSpec(0.7, 0.001, n))
    assert segs[0].start[2] == -0.35 and segs[-1].end[2] == 0.35
    assert np.all(segs.starts[:, :2] == 0)


def test_dipole_even_segments_rejected():
    with pytest.raises(ValidationError, match="odd"):
        discretize_dipole(DipoleSpec(1.0, 0.001, 4))


def test_thin_wire_check_clean_loop():
    segs = discretize_torus(TorusSpec(0.05, 0.001, 64))
    report = thin_wire_check(segs, 2.4e9)
    assert report.wavelength == pytest.approx(0.12492, abs=1e-5)
    assert segs.lengths.max() == pytest.approx(0.0049, abs=1e-4)
    assert not report.long_segment
    assert not report.thick_wire


def test_thin_wire_check_thick_wire():
    freq = 1e9
    lam = C0 / freq
    segs = discretize_torus(TorusSpec(lam, lam / 50, 64))
    assert thin_wire_check(segs, freq).thick_wire


def test_thin_wire_check_stubby_segments():
    segs = discretize_torus(TorusSpec(0.02, 0.0019, 2000))
    report = thin_wire_check(segs, 1e9)
    assert report.stubby_segment and not report.ok


def test_thin_wire_check_long_segments():
    segs = discretize_torus(TorusSpec(0.02, 0.0001, 8))
    assert thin_wire_check(segs, 24e9).long_segment


def test_thin_wire_check_needs_positive_freq():
    with pytest.raises(ValidationError):
        thin_wire_check(discretize_torus(TorusSpec()), 0.0)
