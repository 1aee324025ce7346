"""Tree automorphisms as branch-constant portraits, with exact arithmetic.

An automorphism g of the colored tree is determined by the image of the base
vertex together with its portrait: the local permutation sigma(g, v) that g
induces on the edge colors around each vertex v.  A portrait is admissible
iff adjacent vertices agree on the color of the edge joining them, and every
admissible portrait (with any base image) assembles to an automorphism.

This module computes in the subgroup of branch-constant elements: portraits
that are constant beyond a finite prefix-closed core, one constant per
branch.  Every witness element constructed here is of this shape and the
family is closed under composition and inversion.  Composition obeys the
cocycle rule sigma(g h, v) = sigma(g, h(v)) * sigma(h, v).

For integer colors a core vertex has infinitely many branches, so each core
vertex carries a default branch constant plus finitely many color-indexed
exceptions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .perm_groups import Perm, PermGroup, perm_disagreement
from .tree_core import (
    V0,
    Vertex,
    check_vertex,
    common_prefix_len,
    enumerate_ball,
    neighbor,
    prefix_closure,
)


class PortraitError(ValueError):
    """The data does not describe a valid branch-constant automorphism."""


class TreeAut:
    """A branch-constant tree automorphism.

    base      -- image of the base vertex.
    core      -- prefix-closed finite map vertex -> local permutation.
    branches  -- explicit branch constants keyed by frontier edge (vertex,
                 color).  For a finite color set these cover the whole
                 frontier; for integer colors they are the exceptions to the
                 per-vertex defaults.
    defaults  -- default branch constant per core vertex (integer colors
                 only; None for finite degree).
    deg       -- finite degree, or None for integer colors.

    Instances are immutable.  Equality and hashing go through the canonical
    (minimal-core) form.
    """

    __slots__ = ("deg", "base", "core", "branches", "defaults", "_canon")

    def __init__(self, base, core, branches=None, defaults=None, deg=None, _validate=True):
        self.deg = deg
        self.base = check_vertex(base)
        self.core = {check_vertex(v): p for v, p in core.items()}
        self.branches = {(check_vertex(u), int(c)): f for (u, c), f in (branches or {}).items()}
        if deg is None:
            self.defaults = {check_vertex(v): p for v, p in (defaults or {}).items()}
            # exceptions equal to the default are redundant
            self.branches = {
                (u, c): f for (u, c), f in self.branches.items() if f != self.defaults.get(u, f)
            }
        else:
            if defaults:
                raise PortraitError("defaults are only for integer colors")
            self.defaults = None
        self._canon = None
        if _validate:
            self._validate()

    # -- structure helpers ---------------------------------------------------

    def _core_edge_colors(self, u: Vertex) -> set[int]:
        cols = {c for c in self._child_colors(u)}
        if u:
            cols.add(u[-1])
        return cols

    def _child_colors(self, u: Vertex) -> list[int]:
        if self.deg is not None:
            return [c for c in range(self.deg) if (not u or c != u[-1]) and u + (c,) in self.core]
        return sorted(c for (v, c) in ((w[:-1], w[-1]) for w in self.core if w) if v == u)

    def frontier_colors(self, u: Vertex) -> list[int]:
        """Frontier colors at a core vertex (finite degree only)."""
        if self.deg is None:
            raise PortraitError("frontier is infinite over integer colors")
        return [
            c
            for c in range(self.deg)
            if (not u or c != u[-1]) and u + (c,) not in self.core
        ]

    def is_frontier_color(self, u: Vertex, c: int) -> bool:
        return (not u or c != u[-1]) and u + (c,) not in self.core

    def frontier_rule(self, u: Vertex, c: int) -> Perm:
        if not self.is_frontier_color(u, c):
            raise PortraitError(f"({u}, {c}) is not a frontier edge")
        if self.deg is not None:
            return self.branches[(u, c)]
        return self.branches.get((u, c), self.defaults[u])

    def _validate(self):
        if self.deg is not None and self.deg < 3:
            raise PortraitError("finite color sets need at least three colors")
        if V0 not in self.core:
            raise PortraitError("core must contain the base vertex")
        for v in self.core:
            if v and v[:-1] not in self.core:
                raise PortraitError(f"core is not connected at {v!r}")
        vals = list(self.core.values()) + list(self.branches.values())
        if self.deg is None:
            vals += list(self.defaults.values())
        for p in vals:
            if p.degree != self.deg:
                raise PortraitError(f"permutation domain {p!r} does not match degree {self.deg}")
        # adjacent core vertices agree on the joining edge color
        for v, p in self.core.items():
            if v and self.core[v[:-1]](v[-1]) != p(v[-1]):
                raise PortraitError(f"edge compatibility fails at core edge into {v!r}")
        # branch constants agree with the core on the frontier edge color
        for (u, c), f in self.branches.items():
            if u not in self.core or not self.is_frontier_color(u, c):
                raise PortraitError(f"branch rule at non-frontier edge ({u!r}, {c})")
            if f(c) != self.core[u](c):
                raise PortraitError(f"edge compatibility fails at frontier ({u!r}, {c})")
        if self.deg is not None:
            for u in self.core:
                missing = [c for c in self.frontier_colors(u) if (u, c) not in self.branches]
                if missing:
                    raise PortraitError(f"frontier edges without rules at {u!r}: {missing}")
        else:
            for u, sigma in self.core.items():
                if u not in self.defaults:
                    raise PortraitError(f"core vertex {u!r} lacks a default branch constant")
                bad = perm_disagreement(self.defaults[u], sigma)
                if bad is None:
                    raise PortraitError(f"default at {u!r} disagrees with the core cofinitely")
                covered = self._core_edge_colors(u) | {c for (w, c) in self.branches if w == u}
                if not bad <= covered:
                    raise PortraitError(
                        f"default at {u!r} breaks compatibility at colors {sorted(bad - covered)}"
                    )

    # -- evaluation ---------------------------------------------------------

    def local_action(self, v) -> Perm:
        """sigma(g, v): core lookup, else the constant of the branch holding v."""
        v = tuple(v)
        if v in self.core:
            return self.core[v]
        p = v
        while p not in self.core:
            p = p[:-1]
        return self.frontier_rule(p, v[len(p)])

    def evaluate(self, v) -> Vertex:
        """Image of the vertex: walk the word through the local actions.

        Prefixes inside the core use its permutations; once the walk leaves
        the core it stays in one branch, whose constant covers the rest.
        """
        v = tuple(v)
        w = self.base
        core = self.core
        i, n = 0, len(v)
        while i < n and v[:i] in core:
            w = neighbor(w, core[v[:i]](v[i]))
            i += 1
        if i < n:
            f = self.local_action(v[:i])
            while i < n:
                w = neighbor(w, f(v[i]))
                i += 1
        return w

    def preimage(self, x) -> Vertex:
        """The vertex mapped to x, found by walking the image geodesic."""
        x = tuple(x)
        y: Vertex = V0
        w = self.base
        while w != x:
            k = common_prefix_len(w, x)
            c_img = x[len(w)] if len(w) == k else w[-1]
            c = self.local_action(y).inv()(c_img)
            y = neighbor(y, c)
            w = neighbor(w, c_img)
        return y

    def displacement(self) -> int:
        return len(self.base)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_constant(f: Perm, base=V0) -> "TreeAut":
        """The automorphism with constant portrait f sending the base vertex
        to `base`; constant portraits always satisfy edge compatibility."""
        base = check_vertex(base)
        if f.degree is None:
            return TreeAut(base, {V0: f}, {}, {V0: f}, deg=None)
        d = f.degree
        return TreeAut(base, {V0: f}, {(V0, c): f for c in range(d)}, deg=d)

    @staticmethod
    def identity(deg: int | None) -> "TreeAut":
        return TreeAut.from_constant(Perm.identity(deg))

    # -- core surgery ---------------------------------------------------------

    def extended(self, verts) -> "TreeAut":
        """Enlarge the core to the prefix closure of core plus verts, pulling
        branch constants inward.  The underlying automorphism is unchanged."""
        target = prefix_closure(set(self.core) | {tuple(v) for v in verts})
        if target == set(self.core):
            return self
        core = {v: (self.core[v] if v in self.core else self.local_action(v)) for v in target}
        if self.deg is not None:
            branches = {}
            for u in target:
                for c in range(self.deg):
                    if (not u or c != u[-1]) and u + (c,) not in target:
                        branches[(u, c)] = self.local_action(u + (c,))
            return TreeAut(self.base, core, branches, deg=self.deg)
        defaults = {}
        branches = {}
        for u in target:
            if u in self.core:
                defaults[u] = self.defaults[u]
                for (w, c), f in self.branches.items():
                    if w == u and u + (c,) not in target:
                        branches[(u, c)] = f
            else:
                defaults[u] = self.local_action(u)
        return TreeAut(self.base, core, branches, defaults, deg=None)

    def canonical(self) -> "TreeAut":
        """The unique minimal-core form: core leaves whose whole branch data
        equals their own permutation are absorbed into the parent branch.
        Idempotent; structural equality of canonical forms is equality of
        automorphisms."""
        if self._canon is not None:
            return self._canon
        core = dict(self.core)
        branches = dict(self.branches)
        defaults = dict(self.defaults) if self.deg is None else None
        changed = True
        while changed:
            changed = False
            for u in sorted(core, key=len, reverse=True):
                if u == V0:
                    continue
                if any(u + (c,) in core for c in self._all_child_colors(core, u)):
                    continue  # not a leaf
                sigma = core[u]
                if self.deg is not None:
                    cols = [c for c in range(self.deg) if c != u[-1]]
                    if any(branches[(u, c)] != sigma for c in cols):
                        continue
                    for c in cols:
                        del branches[(u, c)]
                else:
                    if defaults[u] != sigma or any(w == u for (w, _) in branches):
                        continue
                    del defaults[u]
                del core[u]
                parent, c = u[:-1], u[-1]
                if self.deg is not None:
                    branches[(parent, c)] = sigma
                elif sigma != defaults[parent]:
                    branches[(parent, c)] = sigma
                changed = True
        out = TreeAut(self.base, core, branches, defaults, deg=self.deg)
        out._canon = out
        self._canon = out
        return out

    @staticmethod
    def _all_child_colors(core, u):
        return {w[-1] for w in core if w and w[:-1] == u}

    # -- group operations -----------------------------------------------------

    def __mul__(self, other: "TreeAut") -> "TreeAut":
        """Composition (g * h)(v) = g(h(v)), returned in canonical form."""
        g, h = self, other
        if g.deg != h.deg:
            raise PortraitError("cannot compose automorphisms of different trees")
        pts = set(h.core) | {h.preimage(u) for u in g.core}
        support = prefix_closure(pts)
        base = g.evaluate(h.base)

        def rule(n: Vertex) -> Perm:
            return g.local_action(h.evaluate(n)) * h.local_action(n)

        core = {u: rule(u) for u in support}
        if g.deg is not None:
            branches = {}
            for u in support:
                for c in range(g.deg):
                    if (not u or c != u[-1]) and u + (c,) not in support:
                        branches[(u, c)] = rule(u + (c,))
            return TreeAut(base, core, branches, deg=g.deg).canonical()

        defaults = {}
        branches = {}
        for u in support:
            specials = {c for (w, c) in h.branches if w == u}
            sigma_hu = h.local_action(u)
            hu = h.evaluate(u)
            if hu in g.core:
                img_special = {c for (w, c) in g.branches if w == hu}
                img_special |= g._core_edge_colors(hu)
            else:
                img_special = {hu[-1]} if hu else set()
            inv = sigma_hu.inv()
            specials |= {inv(c) for c in img_special}
            blocked = set(specials)
            blocked |= {w[-1] for w in support if w and w[:-1] == u}
            if u:
                blocked.add(u[-1])
            fresh = max(blocked, default=0) + 1
            defaults[u] = rule(u + (fresh,))
            for c in sorted(specials):
                if (not u or c != u[-1]) and u + (c,) not in support:
                    r = rule(u + (c,))
                    if r != defaults[u]:
                        branches[(u, c)] = r
        return TreeAut(base, core, branches, defaults, deg=None).canonical()

    def inverse(self) -> "TreeAut":
        """The inverse automorphism: sigma(g^-1, g(v)) = sigma(g, v)^-1."""
        g = self.extended([self.preimage(V0)])
        core = {}
        images = {u: g.evaluate(u) for u in g.core}
        for u, sigma in g.core.items():
            core[images[u]] = sigma.inv()
        if g.deg is not None:
            branches = {}
            for (u, c), f in g.branches.items():
                branches[(images[u], g.core[u](c))] = f.inv()
            return TreeAut(g.preimage(V0), core, branches, deg=g.deg).canonical()
        defaults = {images[u]: g.defaults[u].inv() for u in g.core}
        branches = {}
        for (u, c), f in g.branches.items():
            branches[(images[u], g.core[u](c))] = f.inv()
        return TreeAut(g.preimage(V0), core, branches, defaults, deg=None).canonical()

    def __pow__(self, n: int) -> "TreeAut":
        if n < 0:
            return self.inverse() ** (-n)
        out = TreeAut.identity(self.deg)
        for _ in range(n):
            out = self * out
        return out

    def is_identity(self) -> bool:
        c = self.canonical()
        return (
            c.base == V0
            and len(c.core) == 1
            and c.core[V0].is_identity()
            and all(f.is_identity() for f in c.branches.values())
            and (c.deg is not None or c.defaults[V0].is_identity())
        )

    def key(self):
        c = self.canonical()
        return (
            c.deg,
            c.base,
            tuple(sorted((v, p.key()) for v, p in c.core.items())),
            tuple(sorted(((u, col), f.key()) for (u, col), f in c.branches.items())),
            tuple(sorted((v, p.key()) for v, p in c.defaults.items())) if c.deg is None else None,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeAut) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        c = self.canonical()
        return f"TreeAut(base={''.join(map(str, c.base)) or 'v0'}, core={len(c.core)})"


# -- group classes ----------------------------------------------------------


@dataclass(frozen=True)
class GroupClass:
    """Which prescribed-local-action group an element is tested against.

    kind "U":  local action in F at every vertex.
    kind "G":  local action in F' everywhere, in F at all but finitely many.
    kind "G*": as "G", restricted to the bipartition-preserving subgroup.
    kind "any": no restriction beyond the tree degree.
    """

    kind: str
    F: PermGroup | None = None
    Fp: PermGroup | None = None
    degree: int | None = None

    @staticmethod
    def universal(F: PermGroup) -> "GroupClass":
        return GroupClass("U", F, F, F.degree)

    @staticmethod
    def prescribed(F: PermGroup, Fp: PermGroup) -> "GroupClass":
        if not Fp.contains_group(F):
            raise ValueError("the prescribed pair needs F <= F'")
        return GroupClass("G", F, Fp, F.degree)

    @staticmethod
    def prescribed_star(F: PermGroup, Fp: PermGroup) -> "GroupClass":
        if not Fp.contains_group(F):
            raise ValueError("the prescribed pair needs F <= F'")
        return GroupClass("G*", F, Fp, F.degree)

    @staticmethod
    def unrestricted(degree: int | None) -> "GroupClass":
        return GroupClass("any", None, None, degree)

    def contains(self, g: TreeAut) -> bool:
        if g.deg != self.degree:
            raise ValueError("element tree degree does not match the class")
        if self.kind == "any":
            return True
        c = g.canonical()
        tails = list(c.branches.values())
        if c.deg is None:
            tails += list(c.defaults.values())
        if self.kind == "U":
            return all(self.F.contains(p) for p in c.core.values()) and all(
                self.F.contains(f) for f in tails
            )
        ok = all(self.Fp.contains(p) for p in c.core.values()) and all(
            self.F.contains(f) for f in tails
        )
        if self.kind == "G*":
            # bipartition preserved iff the base vertex moves an even distance
            ok = ok and len(c.base) % 2 == 0
        return ok

    def label(self) -> str:
        names = {"U": "U(F)", "G": "G(F,F')", "G*": "G(F,F')*", "any": "Aut(T)"}
        return names[self.kind]


def membership(g: TreeAut, cls: GroupClass) -> bool:
    return cls.contains(g)


# -- random and exhaustive element generation --------------------------------


def random_element(cls: GroupClass, core_radius: int, seed: int) -> TreeAut:
    """A seeded random member of the class with core inside the given radius.

    Finite color sets draw compatible portraits vertex by vertex; over the
    integers only the translation family is generated (its portraits are
    forced to be constant by edge compatibility).
    """
    rng = random.Random(seed)
    if cls.degree is None:
        if cls.kind != "any" and cls.F.kind != "z_translations":
            raise ValueError("integer-color random elements: translation family only")
        window = max(2, core_radius + 1)
        shift = rng.randint(-window, window)
        length = rng.randint(0, core_radius)
        if cls.kind == "G*" and length % 2:
            length -= 1
        base = _random_reduced_word(rng, length, range(-window, window + 1))
        return TreeAut.from_constant(Perm.z_translation(shift), base)

    d = cls.degree
    F = cls.F if cls.kind != "any" else PermGroup.symmetric(d)
    Fp = cls.Fp if cls.kind != "any" else F
    verts = {V0}
    layer = [V0]
    for _ in range(core_radius):
        nxt = []
        for u in layer:
            for c in range(d):
                if u and c == u[-1]:
                    continue
                if rng.random() < 0.4:
                    v = u + (c,)
                    verts.add(v)
                    nxt.append(v)
        layer = nxt
    n_exc = rng.randint(0, 2) if cls.kind in ("G", "G*") else 0
    exc = set(rng.sample(sorted(verts), min(n_exc, len(verts))))
    core: dict[Vertex, Perm] = {}
    for u in sorted(verts, key=lambda v: (len(v), v)):
        allowed = Fp if u in exc else F
        if u == V0:
            cand = list(allowed.elements)
        else:
            need = core[u[:-1]](u[-1])
            cand = [p for p in allowed.elements if p(u[-1]) == need]
        if not cand:
            raise ValueError(f"no compatible local action at {u!r}")
        core[u] = rng.choice(cand)
    branches = {}
    for u in sorted(verts, key=lambda v: (len(v), v)):
        for c in range(d):
            if (u and c == u[-1]) or u + (c,) in verts:
                continue
            need = core[u](c)
            cand = [p for p in F.elements if p(c) == need]
            if not cand:
                raise ValueError(f"no branch constant in F for ({u!r}, {c})")
            branches[(u, c)] = rng.choice(cand)
    length = rng.randint(0, core_radius)
    if cls.kind == "G*" and length % 2:
        length -= 1
    base = _random_reduced_word(rng, length, range(d))
    g = TreeAut(base, core, branches, deg=d).canonical()
    assert cls.contains(g)
    return g


def _random_reduced_word(rng: random.Random, length: int, window) -> Vertex:
    word: list[int] = []
    colors = list(window)
    for _ in range(length):
        c = rng.choice(colors)
        while word and c == word[-1]:
            c = rng.choice(colors)
        word.append(c)
    return tuple(word)


def enumerate_branch_constant(F: PermGroup, core_radius: int, bases) -> list[TreeAut]:
    """All elements with local actions in F whose canonical core fits in the
    given ball, for each allowed base image.  Exhaustive: portraits are padded
    to the full ball and every compatible assignment is produced, so the list
    covers every such element exactly once (canonical dedup).
    """
    if F.kind != "finite":
        raise ValueError("exhaustive enumeration needs a finite group")
    d = F.degree
    verts = sorted(enumerate_ball(V0, core_radius, range(d)), key=lambda v: (len(v), v))
    out: list[TreeAut] = []
    seen = set()
    for base in bases:
        stack: list[dict[Vertex, Perm]] = [{}]
        for u in verts:
            nxt = []
            for partial in stack:
                if u == V0:
                    cand = list(F.elements)
                else:
                    need = partial[u[:-1]](u[-1])
                    cand = [p for p in F.elements if p(u[-1]) == need]
                for p in cand:
                    d2 = dict(partial)
                    d2[u] = p
                    nxt.append(d2)
            stack = nxt
        vert_set = set(verts)
        edges = [
            (u, c)
            for u in verts
            for c in range(d)
            if (not u or c != u[-1]) and u + (c,) not in vert_set
        ]
        for core in stack:
            rule_stack: list[dict] = [{}]
            for (u, c) in edges:
                need = core[u](c)
                cand = [p for p in F.elements if p(c) == need]
                rule_stack = [{**r, (u, c): p} for r in rule_stack for p in cand]
            for branches in rule_stack:
                g = TreeAut(base, core, branches, deg=d).canonical()
                if g.key() not in seen:
                    seen.add(g.key())
                    out.append(g)
    return out


# -- end images ---------------------------------------------------------------


def end_image_prefix(g: TreeAut, end, depth: int) -> Vertex:
    """The first `depth` letters of the ray of g applied to the end.

    Exact: the image of a deep enough ray vertex is a prefix of the image
    ray, and evaluating at depth + displacement(g) guarantees enough letters.
    """
    k = depth + len(g.base)
    img = g.evaluate(end.ray_prefix(k))
    if len(img) < depth:
        raise AssertionError("image ray shorter than requested depth")
    return img[:depth]


# -- serialization -------------------------------------------------------------


def perm_to_data(p: Perm):
    if p.kind == "f":
        return list(p.table)
    return {"shift": p.shift, "patch": [[x, y] for x, y in p.patch]}


def perm_from_data(data) -> Perm:
    if isinstance(data, list):
        return Perm.from_table(data)
    return Perm.z_affine(data["shift"], {x: y for x, y in data["patch"]})


def aut_to_data(g: TreeAut) -> dict:
    c = g.canonical()
    out = {
        "degree": c.deg,
        "base": list(c.base),
        "core": sorted([list(v), perm_to_data(p)] for v, p in c.core.items()),
        "branches": sorted([list(u), col, perm_to_data(f)] for (u, col), f in c.branches.items()),
    }
    if c.deg is None:
        out["defaults"] = sorted([list(v), perm_to_data(p)] for v, p in c.defaults.items())
    return out


def aut_from_data(data) -> TreeAut:
    deg = data["degree"]
    core = {tuple(v): perm_from_data(p) for v, p in data["core"]}
    branches = {(tuple(u), c): perm_from_data(f) for u, c, f in data["branches"]}
    defaults = None
    if deg is None:
        defaults = {tuple(v): perm_from_data(p) for v, p in data["defaults"]}
    return TreeAut(tuple(data["base"]), core, branches, defaults, deg=deg)
