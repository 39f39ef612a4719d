import math

import numpy as np
import pytest

from digsite.errors import PackageValidationError
from digsite.sdf import Box, Capsule, ScaleUniform, Sphere, Translate, Union, from_dict


def test_sphere_values():
    s = Sphere((1.0, 2.0, 3.0), 0.5)
    assert s.evaluate(np.array([1.0, 2.0, 3.0])) == -0.5
    assert s.evaluate(np.array([1.5, 2.0, 3.0])) == 0.0
    assert s.evaluate(np.array([1.0, 2.0, 4.0])) == pytest.approx(0.5)
    # batch evaluation matches scalar evaluation
    pts = np.array([[1.0, 2.0, 3.0], [2.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
    batch = s.evaluate(pts)
    for i, p in enumerate(pts):
        assert batch[i] == s.evaluate(p)


def test_box_values():
    b = Box((0.0, 0.0, 0.0), (1.0, 2.0, 3.0))
    assert b.evaluate(np.array([0.0, 0.0, 0.0])) == -1.0  # nearest face is x
    assert b.evaluate(np.array([2.0, 0.0, 0.0])) == pytest.approx(1.0)
    assert b.evaluate(np.array([0.0, 2.5, 0.0])) == pytest.approx(0.5)
    assert b.evaluate(np.array([2.0, 3.0, 4.0])) == pytest.approx(math.sqrt(3.0))
    assert b.evaluate(np.array([1.0, 2.0, 3.0])) == 0.0  # corner


def test_capsule_values():
    c = Capsule((0.0, 0.0, 0.0), (0.0, 0.0, 2.0), 0.5)
    assert c.evaluate(np.array([0.0, 0.0, 1.0])) == -0.5  # on axis
    assert c.evaluate(np.array([0.0, 0.0, 3.0])) == pytest.approx(0.5)  # beyond cap
    assert c.evaluate(np.array([1.0, 0.0, 0.5])) == pytest.approx(0.5)  # radial
    assert c.evaluate(np.array([0.0, 0.5, 2.0])) == 0.0


def test_union_is_min_of_children():
    u = Union([Sphere((0.0, 0.0, 0.0), 1.0), Box((3.0, 0.0, 0.0), (1.0, 1.0, 1.0))])
    rng = np.random.default_rng(4)
    pts = rng.uniform(-3.0, 6.0, size=(200, 3))
    expect = np.minimum(u.children[0].evaluate(pts), u.children[1].evaluate(pts))
    assert np.array_equal(u.evaluate(pts), expect)


def test_translate_and_scale():
    child = Sphere((0.0, 0.0, 0.0), 1.0)
    t = Translate(child, (1.0, -2.0, 0.5))
    assert t.evaluate(np.array([1.0, -2.0, 0.5])) == -1.0
    s = ScaleUniform(child, 2.0)
    assert s.evaluate(np.array([0.0, 0.0, 0.0])) == -2.0
    assert s.evaluate(np.array([4.0, 0.0, 0.0])) == pytest.approx(2.0)


@pytest.mark.parametrize(
    "node",
    [
        Sphere((0.2, -0.1, 0.4), 0.8),
        Box((0.0, 0.5, 0.0), (0.4, 0.9, 0.2)),
        Capsule((0.0, 0.0, 0.0), (1.0, 1.0, 0.0), 0.3),
        Union([Sphere((0.0, 0.0, 0.0), 0.5), Box((1.0, 0.0, 0.0), (0.3, 0.3, 0.3))]),
        Translate(Sphere((0.0, 0.0, 0.0), 0.5), (0.2, 0.2, 0.2)),
        ScaleUniform(Capsule((0.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0.2), 1.7),
    ],
)
def test_lipschitz_bound(node):
    # a true signed distance bound never changes faster than the metric
    rng = np.random.default_rng(11)
    a = rng.uniform(-2.0, 2.0, size=(500, 3))
    b = rng.uniform(-2.0, 2.0, size=(500, 3))
    fa, fb = node.evaluate(a), node.evaluate(b)
    dist = np.linalg.norm(a - b, axis=1)
    assert np.all(np.abs(fa - fb) <= dist * (1.0 + 1e-9) + 1e-12)


@pytest.mark.parametrize(
    "node",
    [
        Sphere((0.2, -0.1, 0.4), 0.8),
        Union([Sphere((0.0, 0.0, 0.0), 0.5), Box((1.0, 0.0, 0.0), (0.3, 0.3, 0.3))]),
        Translate(Capsule((0.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0.2), (0.5, 0.0, 0.0)),
        ScaleUniform(Box((0.0, 0.0, 0.0), (0.4, 0.2, 0.6)), 0.5),
    ],
)
def test_bounds_contain_interior(node):
    lo, hi = node.bounds()
    rng = np.random.default_rng(7)
    pts = rng.uniform(lo - 1.0, hi + 1.0, size=(2000, 3))
    vals = node.evaluate(pts)
    outside_aabb = np.any((pts < lo) | (pts > hi), axis=1)
    assert np.all(vals[outside_aabb] > 0.0)


def test_round_trip_through_dict():
    node = Union(
        [
            Translate(Sphere((0.1, 0.2, 0.3), 0.4), (0.0, 0.1, 0.0)),
            ScaleUniform(Box((0.5, 0.5, 0.5), (0.1, 0.2, 0.3)), 1.5),
            Capsule((0.0, 0.0, 0.0), (0.2, 0.9, 0.1), 0.15),
        ]
    )
    clone = from_dict(node.to_dict())
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1.0, 2.0, size=(300, 3))
    assert np.array_equal(node.evaluate(pts), clone.evaluate(pts))


def test_parser_rejects_unknown_keys():
    with pytest.raises(PackageValidationError, match="geometry"):
        from_dict({"type": "sphere", "center": [0, 0, 0], "radius": 1.0, "colour": "red"})


def test_parser_rejects_missing_and_bad_fields():
    with pytest.raises(PackageValidationError):
        from_dict({"type": "sphere", "center": [0, 0, 0]})
    with pytest.raises(PackageValidationError):
        from_dict({"type": "sphere", "center": [0, 0], "radius": 1.0})
    with pytest.raises(PackageValidationError):
        from_dict({"type": "sphere", "center": [0, 0, 0], "radius": -1.0})
    with pytest.raises(PackageValidationError):
        from_dict({"type": "warp", "center": [0, 0, 0]})
    with pytest.raises(PackageValidationError):
        from_dict({"type": "union", "children": []})
    with pytest.raises(PackageValidationError):
        from_dict(["not", "a", "node"])


def test_parser_depth_limit():
    doc = {"type": "sphere", "center": [0, 0, 0], "radius": 1.0}
    for _ in range(40):
        doc = {"type": "translate", "child": doc, "offset": [0.0, 0.0, 0.0]}
    with pytest.raises(PackageValidationError, match="deep"):
        from_dict(doc)


def test_validate_catches_degenerate_nodes():
    with pytest.raises(PackageValidationError):
        Sphere((0.0, 0.0, 0.0), 0.0).validate()
    with pytest.raises(PackageValidationError):
        Capsule((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), -0.1).validate()
    with pytest.raises(PackageValidationError):
        ScaleUniform(Sphere((0.0, 0.0, 0.0), 1.0), 0.0).validate()
