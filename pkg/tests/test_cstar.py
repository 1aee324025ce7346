"""Witness construction, orbit truncation, the convolution identity, the
fixator filtration, and certificate round-trips."""

import itertools

import pytest

from arboreal.cstar_obstruction import (
    build_certificate,
    certificate_witnesses,
    convolution_annihilation_check,
    disjoint_support_check,
    disjoint_support_pair,
    fixator_filtration_check,
    fixator_witness,
    orbit_truncate,
    parse_certificate,
    resolve_groups,
    serialize_certificate,
    standard_generators,
    verify_certificate,
)
from arboreal.dynamics import fixes_half_tree_pointwise
from arboreal.perm_groups import Perm, PermGroup
from arboreal.portraits import GroupClass, TreeAut, end_image_prefix
from arboreal.tree_core import V0, DirectedEdge, HalfTree, PeriodicEnd, half_tree

ALT3 = PermGroup.alternating(3)
SYM3 = PermGroup.symmetric(3)


def test_fixator_witness_known_small_case():
    h = half_tree(V0, 0)
    g = fixator_witness(ALT3, SYM3, h)
    # the only nontrivial stabilizer of 0 in Sym(3) is the transposition (1 2),
    # and freeness forces the matching branch constants to be the 3-cycles
    assert g.local_action(V0) == Perm.from_cycles(3, (1, 2))
    assert g.frontier_rule(V0, 1) == Perm.from_cycles(3, (0, 1, 2))
    assert g.frontier_rule(V0, 2) == Perm.from_cycles(3, (0, 2, 1))
    assert g.frontier_rule(V0, 0).is_identity()
    assert not g.is_identity()
    assert fixes_half_tree_pointwise(g, h)
    assert GroupClass.prescribed(ALT3, SYM3).contains(g)
    assert not GroupClass.universal(ALT3).contains(g)


def test_fixator_witness_on_deeper_half_trees():
    for h in [half_tree((1,), 2), half_tree((0, 1), 0), half_tree((2,), 2), half_tree((0,), 0)]:
        g = fixator_witness(ALT3, SYM3, h)
        assert not g.is_identity()
        assert fixes_half_tree_pointwise(g, h)
        assert GroupClass.prescribed(ALT3, SYM3).contains(g)
        assert not GroupClass.universal(ALT3).contains(g)


def test_fixator_witness_rejects_degenerate_pairs():
    with pytest.raises(ValueError):
        fixator_witness(ALT3, ALT3, half_tree(V0, 0))
    with pytest.raises(ValueError):
        fixator_witness(SYM3, SYM3, half_tree(V0, 0))
    with pytest.raises(ValueError):
        # Sym(3) does not act freely
        fixator_witness(SYM3, PermGroup.symmetric(3), half_tree(V0, 0))


def test_fixator_witness_over_integer_colors():
    F, Fp = PermGroup.z_translations(), PermGroup.z_finitary_affine()
    h = half_tree(V0, 0)
    g = fixator_witness(F, Fp, h)
    assert not g.is_identity()
    assert fixes_half_tree_pointwise(g, h)
    assert GroupClass.prescribed(F, Fp).contains(g)
    sigma = g.local_action(V0)
    assert sigma(0) == 0 and not sigma.is_identity()


def test_disjoint_support_pair_commutes_and_separates():
    e = DirectedEdge(V0, 0)
    a, b = disjoint_support_pair(ALT3, SYM3, e)
    assert not a.is_identity() and not b.is_identity()
    # support separation: each fixes the other's half-tree pointwise
    assert fixes_half_tree_pointwise(a, HalfTree(e.reversed()))
    assert fixes_half_tree_pointwise(b, HalfTree(e))
    assert a * b == b * a


def independent_orbit_enumeration(gens, xi, length, depth):
    """Second enumerator, coded differently: fold generator sequences with
    itertools.product instead of breadth-first closure."""
    deg = gens[0].deg
    alphabet = []
    for g in gens:
        alphabet += [g, g.inverse()]
    prefixes = set()
    for n in range(length + 1):
        for combo in itertools.product(alphabet, repeat=n):
            el = TreeAut.identity(deg)
            for factor in combo:
                el = el * factor
            prefixes.add(end_image_prefix(el, xi, depth))
    return prefixes


def test_orbit_truncation_matches_independent_enumerator():
    gens = [
        TreeAut.from_constant(Perm.from_cycles(3, (0, 1, 2)), V0),
        TreeAut.from_constant(Perm.identity(3), (0, 1)),
    ]
    xi = PeriodicEnd((), (0, 1))
    orbit = orbit_truncate(gens, xi, 3, 16)
    expected = independent_orbit_enumeration(gens, xi, 3, 16)
    assert {p for _, _, p in orbit.points} == expected
    assert not orbit.depth_warning


def test_orbit_truncation_trivial_cases():
    xi = PeriodicEnd((), (0, 1))
    gens = [TreeAut.identity(3)]
    orbit = orbit_truncate(gens, xi, 4, 12)
    assert len(orbit.points) == 1
    orbit0 = orbit_truncate(standard_generators(ALT3, 3), xi, 0, 12)
    assert len(orbit0.points) == 1


def test_orbit_truncation_depth_warning():
    gens = [TreeAut.from_constant(Perm.identity(3), (0, 1))]
    orbit = orbit_truncate(gens, PeriodicEnd((), (0, 1)), 3, 4)
    assert orbit.depth_warning


def test_disjoint_support_and_annihilation_full_pipeline():
    e = DirectedEdge(V0, 0)
    a, b = disjoint_support_pair(ALT3, SYM3, e)
    gens = [a, b] + standard_generators(ALT3, 3)
    xi = PeriodicEnd((), (0, 1))
    orbit = orbit_truncate(gens, xi, 3, 16)
    assert len(orbit.points) > 10
    assert disjoint_support_check(a, b, orbit)
    report = convolution_annihilation_check(a, b, orbit)
    assert report.ok and report.total == len(orbit.points)


def test_disjoint_support_check_detects_overlap():
    e = DirectedEdge(V0, 0)
    a, _ = disjoint_support_pair(ALT3, SYM3, e)
    gens = [a] + standard_generators(ALT3, 3)
    orbit = orbit_truncate(gens, PeriodicEnd((), (0, 1)), 2, 14)
    # the same element on both sides moves some orbit point twice
    assert not disjoint_support_check(a, a, orbit)
    # an identity side is disjoint from anything
    assert disjoint_support_check(TreeAut.identity(3), a, orbit)


def test_filtration_level_0_trivial_kernel():
    report = fixator_filtration_check(ALT3, SYM3, half_tree(V0, 0), 0)
    assert report.ok
    assert report.details["fixers"] == 1
    assert report.details["enumerated"] == 30


def test_filtration_level_1_onto_stabilizer():
    report = fixator_filtration_check(ALT3, SYM3, half_tree(V0, 0), 1)
    assert report.ok
    assert report.details["stabilizer_order"] == 2
    assert all(report.details["hits"].values())


def test_filtration_rejects_level_2():
    with pytest.raises(ValueError):
        fixator_filtration_check(ALT3, SYM3, half_tree(V0, 0), 2)


def test_resolve_groups_sources():
    F, Fp, deg, _ = resolve_groups({"preset": "g-alt3-sym3"})
    assert deg == 3 and len(F.elements) == 3 and len(Fp.elements) == 6
    F, Fp, deg, _ = resolve_groups({"preset": "wreath-z2-z2"})
    assert deg == 4 and len(Fp.elements) == 8
    with pytest.raises(ValueError):
        resolve_groups({})
    with pytest.raises(ValueError):
        resolve_groups({"preset": "g-alt3-sym3", "wreath": {"gamma": [[0]], "a": [[0]]}})
    with pytest.raises(ValueError):
        resolve_groups({"preset": "no-such"})


def test_build_certificate_valid_for_alt3_sym3():
    cert = build_certificate({"preset": "g-alt3-sym3"})
    assert cert.status == "VALID"
    assert cert.checks["general_type"]["found"]
    assert cert.checks["disjoint_support"] is True
    assert cert.checks["annihilation"]["failures"] == []
    assert cert.checks["commute"] is True
    assert cert.group["edge_stabilizer_amenability"].startswith("finite")
    a, b = certificate_witnesses(cert)
    assert a * b == b * a


def test_build_certificate_invalid_when_groups_coincide():
    cert = build_certificate(
        {"groups": {"F": {"kind": "alternating", "degree": 3},
                    "Fp": {"kind": "alternating", "degree": 3}}}
    )
    assert cert.status == "INVALID:fixator_witness"


def test_build_certificate_wreath_preset():
    cert = build_certificate({"preset": "wreath-z2-z2", "depth": 14})
    assert cert.status == "VALID"
    assert cert.group["omega"] == 4


def test_certificate_round_trip_and_reverify():
    cert = build_certificate({"preset": "g-alt3-sym3"})
    text = serialize_certificate(cert)
    parsed = parse_certificate(text)
    assert serialize_certificate(parsed) == text
    ok, msg = verify_certificate(text)
    assert ok, msg
    # determinism: rebuilding from the same config is byte-identical
    assert serialize_certificate(build_certificate(cert.config)) == text


def test_certificate_rejects_bad_version():
    with pytest.raises(ValueError):
        parse_certificate("someother-cert/9\n{}")


def test_fixator_witness_for_non_transitive_free_pair():
    # the double transposition acts freely with two orbits; the Klein group
    # preserves them, so the construction needs no transitivity
    F = PermGroup.generated([Perm.from_cycles(4, (0, 1), (2, 3))])
    Fp = PermGroup.generated([Perm.from_cycles(4, (0, 1)), Perm.from_cycles(4, (2, 3))])
    h = half_tree(V0, 0)
    g = fixator_witness(F, Fp, h)
    assert not g.is_identity()
    assert fixes_half_tree_pointwise(g, h)
    assert GroupClass.prescribed(F, Fp).contains(g)
    assert not GroupClass.universal(F).contains(g)


def test_integer_witness_has_swap_core_and_translation_branches():
    F, Fp = PermGroup.z_translations(), PermGroup.z_finitary_affine()
    g = fixator_witness(F, Fp, half_tree(V0, 0))
    sigma = g.local_action(V0)
    # deterministic choice: the transposition of the two colors above the edge color
    assert sigma == Perm.z_swap(1, 2)
    # branch constants are the translations matching sigma, identity by default
    assert g.frontier_rule(V0, 1) == Perm.z_translation(1)
    assert g.frontier_rule(V0, 2) == Perm.z_translation(-1)
    assert g.frontier_rule(V0, 0).is_identity()
    assert g.frontier_rule(V0, 7).is_identity()


def test_disjoint_pair_on_all_finite_presets():
    from arboreal.perm_groups import cyclic_table, wreath_embedding

    wf, wfp, _, _ = wreath_embedding(cyclic_table(2), cyclic_table(2))
    pairs = [
        (ALT3, SYM3),
        (PermGroup.cyclic(5), PermGroup.alternating(5)),
        (wf, wfp),
    ]
    for F, Fp in pairs:
        e = DirectedEdge(V0, 0)
        a, b = disjoint_support_pair(F, Fp, e)
        assert a * b == b * a
        assert fixes_half_tree_pointwise(a, HalfTree(e.reversed()))
        assert fixes_half_tree_pointwise(b, HalfTree(e))


def test_integer_color_compose_matches_pointwise_on_window_ball():
    """The default-plus-exceptions bookkeeping under composition, checked
    against direct pointwise evaluation over a window of integer colors."""
    from arboreal.tree_core import enumerate_ball

    F, Fp = PermGroup.z_translations(), PermGroup.z_finitary_affine()
    w1 = fixator_witness(F, Fp, half_tree(V0, 0))
    w2 = fixator_witness(F, Fp, half_tree((1,), 2))
    glide = TreeAut.from_constant(Perm.z_translation(1), (0, 1))
    ball = sorted(enumerate_ball(V0, 3, range(-2, 5)))
    for g, h in [(w1, glide), (glide, w1), (w1, w2), (w2, w1 * glide), (w1 * w2, glide)]:
        gh = g * h
        for v in ball:
            assert gh.evaluate(v) == g.evaluate(h.evaluate(v))
        assert (gh * gh.inverse()).is_identity()
        for v in ball:
            assert gh.inverse().evaluate(gh.evaluate(v)) == v
