"""Classification of tree isometries and the dynamics built on it: axes and
their boundary ends, pointwise fixation of half-trees, independent-hyperbolic
witnesses, and table-tennis certificates for free subgroups.

Every returned classification is certified by the defining identities: a
fixed vertex for elliptic elements, a swapped edge for inversions, and
d(w, g w) = L with d(w, g^2 w) = 2 L for a hyperbolic element with axis
point w and translation length L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .portraits import TreeAut
from .tree_core import (
    V0,
    AxisEnd,
    DirectedEdge,
    HalfTree,
    Vertex,
    distance,
    geodesic,
    half_tree_contains,
    half_tree_subset,
    half_trees_disjoint,
    is_prefix,
)


@dataclass(frozen=True)
class Elliptic:
    fixed_vertex: Vertex


@dataclass(frozen=True)
class Inversion:
    edge: DirectedEdge


@dataclass(frozen=True)
class Hyperbolic:
    length: int
    axis_point: Vertex


def classify_isometry(g: TreeAut):
    """Elliptic, inversion, or hyperbolic, by midpoint descent.

    The displacement function v -> d(v, g v) is convex on the tree, so
    stepping to the midpoint of [v, g v] (for odd length, the mid-edge
    endpoint nearer the image) reaches the minimal-displacement set within
    d(base, g(base)) steps; the answer is certified before returning.
    """
    v: Vertex = V0
    bound = distance(V0, g.evaluate(V0)) + 3
    for _ in range(bound):
        w = g.evaluate(v)
        k = distance(v, w)
        if k == 0:
            return Elliptic(v)
        if k == 1 and g.evaluate(w) == v:
            color = w[-1] if len(w) > len(v) else v[-1]
            return Inversion(DirectedEdge(v, color))
        if distance(v, g.evaluate(w)) == 2 * k:
            return Hyperbolic(k, v)
        path = geodesic(v, w)
        v = path[k // 2] if k % 2 == 0 else path[(k + 1) // 2]
    raise AssertionError("midpoint descent failed to converge")


def translation_length(g: TreeAut) -> int:
    cls = classify_isometry(g)
    return cls.length if isinstance(cls, Hyperbolic) else 0


def _axis_ray_fn(element: TreeAut, start: Vertex):
    """Ray prefixes of the end that the forward orbit of `start` converges to.

    Iterating far enough past the projection of the base vertex onto the
    axis, the orbit words become nested prefixes of the limit ray; stability
    of the prefix is asserted before returning.
    """
    cache: dict[int, Vertex] = {}

    def ray_fn(depth: int) -> Vertex:
        if depth in cache:
            return cache[depth]
        steps = len(start) + depth + 4
        prev = cur = start
        for _ in range(steps):
            prev, cur = cur, element.evaluate(cur)
        if len(cur) < depth or cur[:depth] != prev[:depth]:
            raise AssertionError("axis ray prefix failed to stabilize")
        cache[depth] = cur[:depth]
        return cache[depth]

    return ray_fn


def axis_and_ends(g: TreeAut) -> tuple[AxisEnd, AxisEnd]:
    """The attracting and repelling fixed ends of a hyperbolic element."""
    cls = classify_isometry(g)
    if not isinstance(cls, Hyperbolic):
        raise ValueError(f"axis ends need a hyperbolic element, got {cls!r}")
    w = cls.axis_point
    return (
        AxisEnd(g, 1, _axis_ray_fn(g, w)),
        AxisEnd(g, -1, _axis_ray_fn(g.inverse(), w)),
    )


# -- pointwise fixation of half-trees ----------------------------------------


def fixes_half_tree_pointwise(g: TreeAut, h: HalfTree) -> bool:
    """True iff g fixes every vertex of the half-tree.

    Decided from finitely many checks on the canonical form: core vertices
    inside the half-tree must be fixed, and each branch meeting it must carry
    the identity constant with a fixed root (a branch that contains the whole
    half-tree instead needs the half-tree's root fixed).
    """
    gc = g.canonical()
    for u in gc.core:
        if half_tree_contains(h, u) and gc.evaluate(u) != u:
            return False
    hh, t, cyl = h.head, h.tail, h.is_cylinder

    def branch_ok(u: Vertex, c: int, f) -> bool:
        n = u + (c,)
        if cyl:
            if is_prefix(n, hh) and n != hh:
                rel = "contains_h"
            elif is_prefix(hh, n):
                rel = "meets"
            else:
                return True  # incomparable cylinders are disjoint
        else:
            if is_prefix(t, n):
                return True  # the branch lies under t, outside the half-tree
            rel = "meets"
        if rel == "contains_h":
            return f.is_identity() and gc.evaluate(hh) == hh
        return f.is_identity() and gc.evaluate(n) == n

    if gc.deg is not None:
        return all(
            branch_ok(u, c, gc.branches[(u, c)])
            for u in gc.core
            for c in gc.frontier_colors(u)
        )

    # integer colors: finitely many special colors, then the generic default
    for u in gc.core:
        sigma = gc.core[u]
        moved = sigma.moved_colors()
        candidates = {c for (w, c) in gc.branches if w == u}
        if moved is not None:
            candidates |= moved
        if cyl and len(hh) > len(u) and is_prefix(u, hh):
            candidates.add(hh[len(u)])
        if not cyl and len(t) > len(u) and is_prefix(u, t):
            candidates.add(t[len(u)])
        generic_meets = is_prefix(hh, u) if cyl else not is_prefix(t, u)
        if generic_meets:
            # cofinitely many branches sit inside the half-tree
            if not gc.defaults[u].is_identity() or gc.evaluate(u) != u:
                return False
            if moved is None:
                return False  # cofinitely many branch roots move
        for c in sorted(candidates):
            if gc.is_frontier_color(u, c) and not branch_ok(u, c, gc.frontier_rule(u, c)):
                return False
    return True


# -- products, independence witnesses, table tennis ---------------------------


def enumerate_products(gens: list[TreeAut], max_len: int):
    """All nontrivial products of the generators and their inverses up to the
    given length, deduplicated in canonical form, in deterministic
    breadth-first word order.  Yields (word, element) with word a tuple of
    alphabet indices (2i for gens[i], 2i+1 for its inverse)."""
    if not gens:
        raise ValueError("need at least one generator")
    deg = gens[0].deg
    alphabet: list[TreeAut] = []
    for g in gens:
        alphabet += [g, g.inverse()]
    seen = {TreeAut.identity(deg).key()}
    layer: list[tuple[tuple[int, ...], TreeAut]] = [((), TreeAut.identity(deg))]
    for _ in range(max_len):
        nxt = []
        for word, el in layer:
            for i, a in enumerate(alphabet):
                el2 = el * a
                nxt.append((word + (i,), el2))
        layer = nxt
        for word, el in layer:
            if el.key() not in seen:
                seen.add(el.key())
                yield word, el


def general_type_witness(gens: list[TreeAut], search_len: int):
    """Search products of the generators for two hyperbolic elements whose
    four axis ends are pairwise distinct to the checked depth.

    Returns the lexicographically first such pair, or None when no witness
    exists within the length bound -- absence of a witness is never evidence
    against the action being of general type.
    """
    hyperbolics: list[tuple[tuple[int, ...], TreeAut, Hyperbolic]] = []
    for word, el in enumerate_products(gens, search_len):
        cls = classify_isometry(el)
        if isinstance(cls, Hyperbolic):
            hyperbolics.append((word, el, cls))
    if not hyperbolics:
        return None
    max_len_tr = max(cls.length for _, _, cls in hyperbolics)
    depth = max(2 * max_len_tr * search_len, 8)
    rays = []
    for _, el, _ in hyperbolics:
        att, rep = axis_and_ends(el)
        rays.append((att.ray_prefix(depth), rep.ray_prefix(depth)))
    for i in range(len(hyperbolics)):
        for j in range(i + 1, len(hyperbolics)):
            four = [rays[i][0], rays[i][1], rays[j][0], rays[j][1]]
            if len(set(four)) == 4:
                return hyperbolics[i][1], hyperbolics[j][1]
    return None


@dataclass(frozen=True)
class FreeGroupCertificate:
    """Half-trees and verified inclusions witnessing that two hyperbolic
    elements (at the given power) play table tennis, hence generate a free
    group of rank two."""

    power: int
    half_trees: tuple[HalfTree, HalfTree, HalfTree, HalfTree]  # h1+, h1-, h2+, h2-
    inclusions: tuple[str, ...] = field(default=())
    end_depth: int = 0

    def to_data(self) -> dict:
        return {
            "power": self.power,
            "half_trees": [
                {"tail": list(h.tail), "color": h.color} for h in self.half_trees
            ],
            "inclusions": list(self.inclusions),
            "end_depth": self.end_depth,
        }


def _image_half_tree(t: TreeAut, h: HalfTree) -> HalfTree:
    e = h.edge
    return HalfTree(DirectedEdge(t.evaluate(e.tail), t.local_action(e.tail)(e.color)))


def _maps_complement_into(t: TreeAut, h_from: HalfTree, h_to: HalfTree) -> bool:
    """Check t(T minus h_from) is inside h_to, exactly, on half-tree edges."""
    return half_tree_subset(_image_half_tree(t, h_from.opposite()), h_to)


def ping_pong_certificate(g1: TreeAut, g2: TreeAut, power: int):
    """Find four pairwise-disjoint half-trees around the two axes such that
    the given powers map the complement of each repelling half-tree into the
    matching attracting one.  Returns None when no configuration exists at
    this power (a caller may raise the power); precondition violations raise.
    """
    if power < 1:
        raise ValueError("power must be positive")
    cls1, cls2 = classify_isometry(g1), classify_isometry(g2)
    if not isinstance(cls1, Hyperbolic) or not isinstance(cls2, Hyperbolic):
        raise ValueError("both elements must be hyperbolic")
    reach = 2 * power * max(cls1.length, cls2.length) + 8
    depth = reach + 2
    rays = []
    for g in (g1, g2):
        att, rep = axis_and_ends(g)
        rays += [att.ray_prefix(depth), rep.ray_prefix(depth)]
    if len(set(rays)) < 4:
        raise ValueError("end pairs coincide; no table-tennis configuration")
    t1 = g1**power
    t2 = g2**power
    t1i, t2i = t1.inverse(), t2.inverse()

    def edge_at(ray: Vertex, r: int) -> HalfTree:
        return HalfTree(DirectedEdge(ray[: r - 1], ray[r - 1]))

    candidates = sorted(
        ((r1p, r1m, r2p, r2m)
         for r1p in range(1, reach + 1)
         for r1m in range(1, reach + 1)
         for r2p in range(1, reach + 1)
         for r2m in range(1, reach + 1)),
        key=lambda rs: (sum(rs), rs),
    )
    for rs in candidates:
        hs = tuple(edge_at(ray, r) for ray, r in zip(rays, rs))
        if any(
            not half_trees_disjoint(hs[i], hs[j])
            for i in range(4)
            for j in range(i + 1, 4)
        ):
            continue
        checks = [
            ("g1^p maps complement of h1- into h1+", t1, hs[1], hs[0]),
            ("g1^-p maps complement of h1+ into h1-", t1i, hs[0], hs[1]),
            ("g2^p maps complement of h2- into h2+", t2, hs[3], hs[2]),
            ("g2^-p maps complement of h2+ into h2-", t2i, hs[2], hs[3]),
        ]
        if all(_maps_complement_into(t, a, b) for _, t, a, b in checks):
            return FreeGroupCertificate(
                power=power,
                half_trees=hs,
                inclusions=tuple(name for name, *_ in checks),
                end_depth=depth,
            )
    return None
