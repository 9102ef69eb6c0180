import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mlsorth.pointset import (
    EmptyPointSetError,
    ScaleFrame,
    apply_scale,
    make_pointset,
    nearest_indices,
    normalizing_frame,
    parse_points,
    read_points,
    select_neighborhood,
    write_points,
)

coords = arrays(float, st.tuples(st.integers(1, 12), st.integers(1, 3)),
                elements=st.floats(-10, 10))


def test_unit_weights_by_default():
    ps = make_pointset([[0, 0], [1, 1]])
    np.testing.assert_array_equal(ps.weights, [1, 1])
    assert ps.n == 2 and ps.dim == 2


def test_arrays_are_read_only():
    ps = make_pointset([[0.0, 0.0]])
    with pytest.raises(ValueError):
        ps.points[0, 0] = 1.0


@pytest.mark.parametrize("bad", [[0.0, 1.0], [1.0, -1.0], [1.0, np.inf]])
def test_bad_weights_rejected(bad):
    with pytest.raises(ValueError):
        make_pointset([[0, 0], [1, 1]], bad)


def test_empty_rejected():
    with pytest.raises(EmptyPointSetError, match="empty point set"):
        make_pointset(np.zeros((0, 2)))


def test_fingerprint_tracks_content():
    a = make_pointset([[0, 0], [1, 1]])
    b = make_pointset([[0, 0], [1, 1]])
    c = make_pointset([[0, 0], [1, 2]])
    assert a.fingerprint == b.fingerprint != c.fingerprint


@given(coords, st.floats(0.01, 4.0))
def test_scale_roundtrip(pts, s):
    ps = make_pointset(pts)
    c = ps.points[0]
    fr = ScaleFrame(c, s)
    np.testing.assert_allclose(fr.from_local(fr.to_local(ps.points)), ps.points, atol=1e-9)
    scaled = apply_scale(ps, fr)
    np.testing.assert_allclose(scaled.points - c, s * (ps.points - c), atol=1e-9)


@given(coords)
def test_normalizing_frame_maps_into_unit_ball(pts):
    ps = make_pointset(pts)
    fr = normalizing_frame(ps)
    r = np.linalg.norm(fr.to_local(ps.points), axis=1)
    assert np.all(r <= 1 + 1e-12)
    if np.any(r > 0):
        assert np.max(r) == pytest.approx(1.0)


def test_normalizing_frame_degenerate_scale():
    ps = make_pointset([[1.0, 2.0]])
    assert normalizing_frame(ps, [1.0, 2.0]).scale == 1.0


def test_nearest_is_stable_on_ties():
    ps = make_pointset([[1, 0], [0, 1], [-1, 0], [0, 0.5]])
    np.testing.assert_array_equal(nearest_indices(ps, [0, 0], 4), [3, 0, 1, 2])
    sub = select_neighborhood(ps, [0, 0], 2)
    np.testing.assert_array_equal(sub.points, [[0, 0.5], [1, 0]])


def test_parse_comments_and_weights():
    text = "# header\n\n0 0 2\n1 0 3\n"
    ps = parse_points(text, dim=2)
    np.testing.assert_array_equal(ps.weights, [2, 3])
    assert parse_points(text).dim == 3


def test_parse_inconsistent_columns():
    with pytest.raises(ValueError, match="inconsistent"):
        parse_points("0 0\n1 2 3\n")


def test_parse_empty():
    with pytest.raises(EmptyPointSetError):
        parse_points("# nothing\n")


def test_write_read_roundtrip(tmp_path, rng):
    ps = make_pointset(rng.normal(size=(7, 3)), rng.uniform(0.5, 2, 7))
    p = tmp_path / "pts.txt"
    write_points(p, ps, with_weights=True)
    back = read_points(p, dim=3)
    np.testing.assert_array_equal(back.points, ps.points)
    np.testing.assert_array_equal(back.weights, ps.weights)


def test_grid_and_circle_fixtures(grid9, circle6):
    np.testing.assert_array_equal(grid9.weights, np.ones(9))
    assert (circle6.n, circle6.dim) == (6, 2)


def test_six_nearest_of_twenty(rng):
    ps = make_pointset(rng.uniform(-1, 1, (20, 2)))
    d = np.linalg.norm(ps.points, axis=1)
    sub = select_neighborhood(ps, [0, 0], 6)
    np.testing.assert_array_equal(sub.points, ps.points[np.argsort(d)[:6]])
    full = select_neighborhood(ps, [0, 0], 20)
    assert np.all(np.diff(np.linalg.norm(full.points, axis=1)) >= 0)


def test_scale_examples():
    ps = make_pointset([[1.0, 0.0], [0.3, -0.2]])
    np.testing.assert_array_equal(apply_scale(ps, ScaleFrame([0, 0], 1.0)).points, ps.points)
    assert apply_scale(ps, ScaleFrame([0, 0], 0.5)).points[0].tolist() == [0.5, 0.0]


def test_scaled_disc_radius_bound(rng):
    from mlsorth.harness import sample_disc

    ps = apply_scale(sample_disc(rng, 500), ScaleFrame([0, 0], 2.0**-4))
    assert np.all(np.linalg.norm(ps.points, axis=1) <= 2.0**-4)


@given(coords, st.floats(1e-3, 1.0))
def test_scale_inverse_relative_1e12(pts, s):
    ps = make_pointset(pts)
    c = np.zeros(ps.dim)
    back = apply_scale(apply_scale(ps, ScaleFrame(c, s)), ScaleFrame(c, 1 / s))
    np.testing.assert_allclose(back.points, ps.points, rtol=1e-12, atol=1e-300)
