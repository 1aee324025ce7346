"""Isometry classification, axis ends, half-tree fixation, and the witnesses
for independent hyperbolic elements and free subgroups."""

import pytest

from arboreal.dynamics import (
    Elliptic,
    Hyperbolic,
    Inversion,
    axis_and_ends,
    classify_isometry,
    fixes_half_tree_pointwise,
    general_type_witness,
    ping_pong_certificate,
)
from arboreal.perm_groups import Perm, PermGroup
from arboreal.portraits import GroupClass, TreeAut, end_image_prefix, random_element
from arboreal.tree_core import V0, distance, enumerate_ball, half_tree

ALT3 = PermGroup.alternating(3)
SYM3 = PermGroup.symmetric(3)
G_CLASS = GroupClass.prescribed(ALT3, SYM3)

IDENT3 = Perm.identity(3)
ROT = Perm.from_cycles(3, (0, 1, 2))


def brute_force_classification(g, window=range(3)):
    """Oracle: minimal displacement over the ball of radius d(v0, g v0) + 2."""
    r = distance(V0, g.evaluate(V0)) + 2
    ball = sorted(enumerate_ball(V0, r, window))
    disp = {v: distance(v, g.evaluate(v)) for v in ball}
    m = min(disp.values())
    if m == 0:
        return "elliptic", 0
    if m == 1:
        for v, d in disp.items():
            if d == 1 and g.evaluate(g.evaluate(v)) == v:
                return "inversion", 1
    return "hyperbolic", m


def kind_of(cls):
    return {Elliptic: "elliptic", Inversion: "inversion", Hyperbolic: "hyperbolic"}[type(cls)]


def test_identity_is_elliptic_at_base():
    assert classify_isometry(TreeAut.identity(3)) == Elliptic(V0)


def test_edge_inversion_classification():
    g = TreeAut.from_constant(IDENT3, (0,))
    cls = classify_isometry(g)
    assert isinstance(cls, Inversion)
    assert {cls.edge.tail, cls.edge.head} == {V0, (0,)}


def test_rigid_glide_is_hyperbolic_of_length_2():
    g = TreeAut.from_constant(IDENT3, (0, 1))
    cls = classify_isometry(g)
    assert isinstance(cls, Hyperbolic) and cls.length == 2
    assert brute_force_classification(g) == ("hyperbolic", 2)
    w = cls.axis_point
    p = g
    for n in range(1, 6):
        assert distance(w, p.evaluate(w)) == n * cls.length
        p = g * p


def test_rotation_is_elliptic():
    cls = classify_isometry(TreeAut.from_constant(ROT, V0))
    assert isinstance(cls, Elliptic) and cls.fixed_vertex == V0


def test_classification_matches_brute_force_on_random_elements():
    for s in range(60):
        g = random_element(G_CLASS, 2, seed=1000 + s)
        cls = classify_isometry(g)
        kind, length = brute_force_classification(g)
        assert kind_of(cls) == kind
        if kind == "hyperbolic":
            assert cls.length == length
            assert distance(cls.axis_point, g.evaluate(cls.axis_point)) == length


def test_classification_is_conjugation_equivariant():
    for s in range(20):
        g = random_element(G_CLASS, 2, seed=2000 + s)
        h = random_element(G_CLASS, 2, seed=3000 + s)
        c1, c2 = classify_isometry(g), classify_isometry(h * g * h.inverse())
        assert kind_of(c1) == kind_of(c2)
        if isinstance(c1, Hyperbolic):
            assert c1.length == c2.length


def test_axis_ends_of_the_glide():
    g = TreeAut.from_constant(IDENT3, (0, 1))
    att, rep = axis_and_ends(g)
    assert att.ray_prefix(8) == (0, 1, 0, 1, 0, 1, 0, 1)
    assert rep.ray_prefix(8) == (1, 0, 1, 0, 1, 0, 1, 0)
    ia, ir = axis_and_ends(g.inverse())
    assert ia.ray_prefix(8) == rep.ray_prefix(8)
    assert ir.ray_prefix(8) == att.ray_prefix(8)


def test_axis_ends_reject_non_hyperbolic():
    with pytest.raises(ValueError):
        axis_and_ends(TreeAut.identity(3))


def test_axis_ends_conjugation_equivariance_to_depth_8():
    g = TreeAut.from_constant(IDENT3, (0, 1))
    for s in range(8):
        h = random_element(G_CLASS, 2, seed=4000 + s)
        att, rep = axis_and_ends(g)
        catt, crep = axis_and_ends(h * g * h.inverse())
        assert catt.ray_prefix(8) == end_image_prefix(h, att, 8)
        assert crep.ray_prefix(8) == end_image_prefix(h, rep, 8)


def test_identity_fixes_every_half_tree():
    e = TreeAut.identity(3)
    for h in [half_tree(V0, 0), half_tree((0, 1), 2), half_tree((1,), 1)]:
        assert fixes_half_tree_pointwise(e, h)
        assert fixes_half_tree_pointwise(e, h.opposite())


def test_edge_inversion_moves_its_own_half_tree():
    g = TreeAut.from_constant(IDENT3, (0,))
    assert not fixes_half_tree_pointwise(g, half_tree(V0, 0))
    assert not fixes_half_tree_pointwise(g, half_tree((0,), 0))


def test_half_tree_fixation_agrees_with_ball_oracle():
    halves = [half_tree(V0, 0), half_tree((0,), 1), half_tree((1, 0), 2),
              half_tree((0,), 0), half_tree((0, 1), 1)]
    ball = sorted(enumerate_ball(V0, 5, range(3)))
    from arboreal.tree_core import half_tree_contains

    for s in range(40):
        g = random_element(G_CLASS, 2, seed=5000 + s)
        for h in halves:
            decided = fixes_half_tree_pointwise(g, h)
            oracle = all(
                g.evaluate(v) == v for v in ball if half_tree_contains(h, v)
            )
            assert decided == oracle


def test_half_tree_fixation_over_integer_colors():
    # constant translation moves every co-cylinder half-tree, fixes none
    t = TreeAut.from_constant(Perm.z_translation(1), V0)
    assert not fixes_half_tree_pointwise(t, half_tree(V0, 0))
    assert fixes_half_tree_pointwise(TreeAut.identity(None), half_tree(V0, 5))


def test_general_type_witness_found_for_universal_generators():
    gens = [TreeAut.from_constant(ROT, (0,)), TreeAut.from_constant(ROT, (0, 1))]
    found = general_type_witness(gens, 3)
    assert found is not None
    g1, g2 = found
    assert isinstance(classify_isometry(g1), Hyperbolic)
    assert isinstance(classify_isometry(g2), Hyperbolic)
    a1, r1 = axis_and_ends(g1)
    a2, r2 = axis_and_ends(g2)
    rays = {e.ray_prefix(12) for e in (a1, r1, a2, r2)}
    assert len(rays) == 4


def test_general_type_witness_not_found_for_identity():
    assert general_type_witness([TreeAut.identity(3)], 3) is None


def test_general_type_witness_not_found_for_a_single_hyperbolic():
    g = TreeAut.from_constant(IDENT3, (0, 1))
    assert general_type_witness([g], 3) is None


def test_ping_pong_certificate_for_glide_and_conjugate():
    g1 = TreeAut.from_constant(IDENT3, (0, 1))
    flip = TreeAut.from_constant(IDENT3, (2,))  # inversion of a third edge
    g2 = flip * g1 * flip.inverse()
    cert = ping_pong_certificate(g1, g2, power=1)
    assert cert is not None
    assert cert.power == 1
    h1p, h1m, h2p, h2m = cert.half_trees
    from arboreal.tree_core import half_trees_disjoint

    hs = [h1p, h1m, h2p, h2m]
    for i in range(4):
        for j in range(i + 1, 4):
            assert half_trees_disjoint(hs[i], hs[j])
    assert len(cert.inclusions) == 4


def test_ping_pong_rejects_shared_ends():
    g = TreeAut.from_constant(IDENT3, (0, 1))
    with pytest.raises(ValueError):
        ping_pong_certificate(g, g, power=1)


def test_ping_pong_rejects_zero_power():
    g1 = TreeAut.from_constant(IDENT3, (0, 1))
    flip = TreeAut.from_constant(IDENT3, (2,))
    with pytest.raises(ValueError):
        ping_pong_certificate(g1, flip * g1 * flip.inverse(), power=0)


def test_hyperbolic_axis_point_translates_linearly():
    found = 0
    for s in range(60):
        g = random_element(G_CLASS, 2, seed=6000 + s)
        cls = classify_isometry(g)
        if not isinstance(cls, Hyperbolic):
            continue
        found += 1
        w = cls.axis_point
        p = g
        for n in range(1, 6):
            assert distance(w, p.evaluate(w)) == n * cls.length
            p = g * p
        if found >= 10:
            break
    assert found >= 3


def test_ping_pong_certificate_serializes():
    g1 = TreeAut.from_constant(IDENT3, (0, 1))
    flip = TreeAut.from_constant(IDENT3, (2,))
    cert = ping_pong_certificate(g1, flip * g1 * flip.inverse(), power=1)
    data = cert.to_data()
    assert data["power"] == 1
    assert len(data["half_trees"]) == 4
    assert all(set(h) == {"tail", "color"} for h in data["half_trees"])
    assert len(data["inclusions"]) == 4


def test_half_tree_fixation_oracle_over_integer_colors():
    """Decision procedure vs direct evaluation over a window ball, for
    elements whose portraits carry defaults and exceptions."""
    from arboreal.cstar_obstruction import fixator_witness
    from arboreal.perm_groups import PermGroup
    from arboreal.tree_core import half_tree_contains

    F, Fp = PermGroup.z_translations(), PermGroup.z_finitary_affine()
    w1 = fixator_witness(F, Fp, half_tree(V0, 0))
    w2 = fixator_witness(F, Fp, half_tree((1,), 2))
    glide = TreeAut.from_constant(Perm.z_translation(1), (0, 1))
    elements = [w1, w2, w1 * w2, glide, w1 * glide, TreeAut.identity(None)]
    halves = [half_tree(V0, 0), half_tree(V0, 2), half_tree((0,), 0),
              half_tree((1,), 2), half_tree((2, 1), 0)]
    ball = sorted(enumerate_ball(V0, 4, range(-2, 4)))
    for g in elements:
        for h in halves:
            decided = fixes_half_tree_pointwise(g, h)
            ball_fixed = all(
                g.evaluate(v) == v for v in ball if half_tree_contains(h, v)
            )
            if decided:
                assert ball_fixed
            else:
                # moved witnesses for these elements lie within the window
                assert not ball_fixed, (g, h)
