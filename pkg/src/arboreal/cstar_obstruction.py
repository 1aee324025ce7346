"""The finite obstruction pipeline and its certificates.

Given permutation groups F < F' with F acting freely and F' preserving the
F-orbits, the group of tree automorphisms with local action prescribed by F'
everywhere and by F almost everywhere contains nontrivial pointwise fixators
of half-trees.  Fixators supported in the two half-trees of one edge have
disjoint support on any boundary orbit, so the convolution operator
(1-a)(1-b) kills every basis vector of the orbit's ell^2 space:
delta_eta - delta_{b eta} - delta_{a eta} + delta_{ab eta} = 0.

This module builds the witnesses, truncates a boundary orbit to finite depth,
checks the identity point by point, and bundles everything into a versioned,
re-verifiable certificate.  Amenability facts are never decided: they enter
certificates only as structural annotations carried by the permutation
groups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dynamics import enumerate_products, fixes_half_tree_pointwise, general_type_witness
from .perm_groups import (
    Perm,
    PermGroup,
    check_freeness,
    check_orbit_preservation,
    cyclic_table,
    point_stabilizer,
    wreath_embedding,
)
from .portraits import (
    GroupClass,
    TreeAut,
    aut_from_data,
    aut_to_data,
    end_image_prefix,
    enumerate_branch_constant,
)
from .tree_core import (
    V0,
    DirectedEdge,
    HalfTree,
    PeriodicEnd,
    enumerate_ball,
    neighbor,
)

CERT_VERSION = "arboreal-cert/1"


# -- witness construction ------------------------------------------------------


def _require_admissible_pair(F: PermGroup, Fp: PermGroup):
    if not check_freeness(F):
        raise ValueError("F must act freely on the color set")
    if not check_orbit_preservation(F, Fp):
        raise ValueError("F' must preserve the orbits of F")
    if F.kind == "finite" and len(F.elements) == len(Fp.elements):
        raise ValueError("F must be a proper subgroup of F'")
    if F.kind != "finite" and F.kind == Fp.kind:
        raise ValueError("F must be a proper subgroup of F'")


def _stabilizer_element(F: PermGroup, Fp: PermGroup, a: int) -> Perm:
    """A nontrivial element of F' fixing the color a.

    Exists whenever F < F' preserves F-orbits; failure here signals a broken
    precondition, not a legitimate outcome.
    """
    if Fp.kind == "finite":
        for p in Fp.elements:
            if not p.is_identity() and p(a) == a:
                return p
        raise AssertionError("no nontrivial stabilizer despite admissible pair")
    return Perm.z_swap(a + 1, a + 2)


def _matching_f_element(F: PermGroup, b: int, target: int) -> Perm:
    """The element of F sending b to target (unique when F acts freely)."""
    if F.kind == "finite":
        for p in F.elements:
            if p(b) == target:
                return p
        raise AssertionError(f"no element of F sends {b} to {target}")
    if F.kind == "z_translations":
        return Perm.z_translation(target - b)
    raise ValueError(f"unsupported F kind {F.kind!r}")


def fixator_witness(F: PermGroup, Fp: PermGroup, h: HalfTree, sigma: Perm | None = None) -> TreeAut:
    """A nontrivial automorphism fixing the half-tree pointwise.

    The local action is the identity throughout the half-tree, a nontrivial
    stabilizer element sigma of the edge color at the facing vertex, and on
    every other branch at the facing vertex the F-element matching sigma on
    the branch color.  The result lies in G(F,F') but (for nontrivial sigma
    and free F) not in U(F).
    """
    _require_admissible_pair(F, Fp)
    t, a = h.tail, h.color
    deg = F.degree
    if sigma is None:
        sigma = _stabilizer_element(F, Fp, a)
    if sigma(a) != a:
        raise ValueError("sigma must fix the color of the defining edge")

    core: dict = {}
    branches: dict = {}
    defaults: dict | None = {} if deg is None else None
    if h.is_cylinder:
        # fixed side is away from the base vertex; the facing component,
        # including the base vertex, moves through constants matched to sigma
        if t:
            b0 = t[-1]
            sig_b0 = _matching_f_element(F, b0, sigma(b0))
        for k in range(len(t)):
            core[t[:k]] = sig_b0
        core[t] = sigma
        for k in range(len(t)):
            w = t[:k]
            if deg is None:
                defaults[w] = core[w]
            else:
                for c in range(deg):
                    if (not w or c != w[-1]) and w + (c,) != t[: k + 1]:
                        branches[(w, c)] = core[w]
        if deg is None:
            defaults[t] = Perm.identity(None)
            for c in set(x for x, _ in sigma.patch):
                if (not t or c != t[-1]) and c != a:
                    branches[(t, c)] = _matching_f_element(F, c, sigma(c))
        else:
            for c in range(deg):
                if t and c == t[-1]:
                    continue
                branches[(t, c)] = (
                    Perm.identity(deg) if c == a else _matching_f_element(F, c, sigma(c))
                )
    else:
        # fixed side contains the base vertex; only branches hanging off the
        # facing vertex move
        ident = Perm.identity(deg)
        for k in range(len(t)):
            w = t[:k]
            core[w] = ident
            if deg is None:
                defaults[w] = ident
            else:
                for c in range(deg):
                    if (not w or c != w[-1]) and w + (c,) != t[: k + 1]:
                        branches[(w, c)] = ident
        core[t] = sigma
        if deg is None:
            defaults[t] = Perm.identity(None)
            for c in set(x for x, _ in sigma.patch):
                if c != t[-1]:
                    branches[(t, c)] = _matching_f_element(F, c, sigma(c))
        else:
            for c in range(deg):
                if c == t[-1]:
                    continue
                branches[(t, c)] = _matching_f_element(F, c, sigma(c))

    img = t
    for k in range(len(t), 0, -1):
        img = _step(img, core[t[:k]], t[k - 1])
    g = TreeAut(img, core, branches, defaults, deg=deg).canonical()

    if g.is_identity():
        raise AssertionError("witness collapsed to the identity")
    if not fixes_half_tree_pointwise(g, h):
        raise AssertionError("witness fails to fix its half-tree")
    if not GroupClass.prescribed(F, Fp).contains(g):
        raise AssertionError("witness escapes the prescribed class")
    return g


def _step(img, sigma, letter):
    return neighbor(img, sigma(letter))


def disjoint_support_pair(F: PermGroup, Fp: PermGroup, e: DirectedEdge) -> tuple[TreeAut, TreeAut]:
    """Nontrivial fixators of the two half-trees at e: the first fixes the
    tail side (so its support lies in the head side), the second the reverse.
    Disjointly supported automorphisms commute."""
    a = fixator_witness(F, Fp, HalfTree(e.reversed()))
    b = fixator_witness(F, Fp, HalfTree(e))
    return a, b


# -- orbit truncation and the convolution identity ----------------------------


@dataclass
class OrbitTruncation:
    """Products of the generators up to the word length, applied to the base
    end, with image rays truncated and deduplicated at the stated depth."""

    base_end: PeriodicEnd
    generators: list[TreeAut]
    word_length: int
    depth: int
    points: list[tuple[tuple[int, ...], TreeAut, tuple[int, ...]]]
    heuristic_bound: int
    depth_warning: bool


def orbit_truncate(
    gens: list[TreeAut], xi: PeriodicEnd, word_length: int, depth: int
) -> OrbitTruncation:
    """Enumerate the orbit of the end under short products of the generators.

    Deduplication is ray-prefix equality at the stated depth, so the point
    count is a lower bound for the true orbit; a depth below the recorded
    heuristic bound only raises a warning flag.
    """
    if not gens:
        raise ValueError("need at least one generator")
    deg = gens[0].deg
    max_disp = max(len(g.base) for g in gens)
    bound = 2 * word_length * max_disp + len(xi.prefix) + len(xi.period)
    items = [((), TreeAut.identity(deg))]
    items += list(enumerate_products(gens, word_length))
    seen: set = set()
    points = []
    for word, el in items:
        pref = end_image_prefix(el, xi, depth)
        if pref not in seen:
            seen.add(pref)
            points.append((word, el, pref))
    return OrbitTruncation(
        base_end=xi,
        generators=list(gens),
        word_length=word_length,
        depth=depth,
        points=points,
        heuristic_bound=bound,
        depth_warning=depth < bound,
    )


def disjoint_support_check(a: TreeAut, b: TreeAut, orbit: OrbitTruncation) -> bool:
    """True iff no truncated orbit point is moved by both a and b."""
    xi, depth = orbit.base_end, orbit.depth
    for _, el, pref in orbit.points:
        a_moves = end_image_prefix(a * el, xi, depth) != pref
        b_moves = end_image_prefix(b * el, xi, depth) != pref
        if a_moves and b_moves:
            return False
    return True


@dataclass
class AnnihilationReport:
    """Point-by-point verdicts for the convolution identity
    delta_eta - delta_{b eta} - delta_{a eta} + delta_{ab eta} = 0."""

    total: int
    passed: int
    failures: list[tuple[tuple[int, ...], str]]
    depth: int
    caveat: str

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def convolution_annihilation_check(a: TreeAut, b: TreeAut, orbit: OrbitTruncation) -> AnnihilationReport:
    """Verify, at the truncation depth, that applying (1-a)(1-b) to each
    orbit point's basis vector gives zero: the multiset {eta, a b eta} must
    equal {a eta, b eta}."""
    xi, depth = orbit.base_end, orbit.depth
    failures = []
    for word, el, eta in orbit.points:
        a_eta = end_image_prefix(a * el, xi, depth)
        b_eta = end_image_prefix(b * el, xi, depth)
        ab_eta = end_image_prefix(a * (b * el), xi, depth)
        if sorted([eta, ab_eta]) != sorted([a_eta, b_eta]):
            failures.append((word, f"{eta} -> {a_eta}, {b_eta}, {ab_eta}"))
    return AnnihilationReport(
        total=len(orbit.points),
        passed=len(orbit.points) - len(failures),
        failures=failures,
        depth=depth,
        caveat=f"end images compared at depth {depth}",
    )


# -- the fixator filtration ----------------------------------------------------


@dataclass
class FiltrationReport:
    level: int
    ok: bool
    details: dict


def fixator_filtration_check(F: PermGroup, Fp: PermGroup, h: HalfTree, level: int) -> FiltrationReport:
    """Check the bottom of the filtration of half-tree fixators by how far
    out their local actions leave F.

    Level 0: the fixators with local action in F everywhere are trivial
    (exhaustive over core radius 2 when F acts freely).  Level 1: the local
    action at the facing vertex maps the level-1 fixators onto the full point
    stabilizer of the edge color in F' (explicit preimages).  Higher levels
    are combinatorially out of reach and rejected.
    """
    if level >= 2:
        raise ValueError("filtration levels >= 2 are unsupported (combinatorial blow-up)")
    _require_admissible_pair(F, Fp)
    if level == 0:
        if F.kind != "finite":
            raise ValueError("level-0 enumeration needs a finite color set")
        bases = sorted(enumerate_ball(V0, 2, range(F.degree)))
        elements = enumerate_branch_constant(F, 2, bases)
        fixers = [g for g in elements if fixes_half_tree_pointwise(g, h)]
        ok = len(fixers) == 1 and fixers[0].is_identity()
        return FiltrationReport(
            level=0,
            ok=ok,
            details={"enumerated": len(elements), "fixers": len(fixers)},
        )
    stab = point_stabilizer(Fp, h.color)
    if stab.kind != "finite":
        raise ValueError("level-1 surjectivity needs a listable stabilizer")
    hits = {}
    for tau in stab.elements:
        if tau.is_identity():
            g = TreeAut.identity(F.degree)
        else:
            g = fixator_witness(F, Fp, h, sigma=tau)
        ok_tau = (
            g.local_action(h.tail) == tau
            and fixes_half_tree_pointwise(g, h)
            and GroupClass.prescribed(F, Fp).contains(g)
        )
        hits[str(tau)] = ok_tau
    return FiltrationReport(
        level=1,
        ok=all(hits.values()),
        details={"stabilizer_order": len(stab.elements), "hits": hits},
    )


# -- presets, pipeline, certificates -------------------------------------------


def resolve_groups(config: dict) -> tuple[PermGroup, PermGroup, int | None, str]:
    """Resolve the (F, F') pair named by a config: a preset name, an explicit
    finite pair, or wreath parameters.  Exactly one source must be given."""
    sources = [k for k in ("preset", "groups", "wreath") if config.get(k)]
    if len(sources) != 1:
        raise ValueError(f"exactly one group source required, got {sources or 'none'}")
    if config.get("preset"):
        name = config["preset"]
        if name == "g-alt3-sym3":
            return PermGroup.alternating(3), PermGroup.symmetric(3), 3, "G(Alt(3), Sym(3))"
        if name == "g-cycle5-alt5":
            return PermGroup.cyclic(5), PermGroup.alternating(5), 5, "G(C5, Alt(5))"
        if name == "z-translations":
            return (
                PermGroup.z_translations(),
                PermGroup.z_finitary_affine(),
                None,
                "G(translations, finitary-affine) on integer colors",
            )
        if name.startswith("wreath-z"):
            try:
                n, m = (int(s[1:]) for s in name[len("wreath-") :].split("-"))
            except Exception as exc:
                raise ValueError(f"bad wreath preset {name!r}") from exc
            F, Fp, points, _ = wreath_embedding(cyclic_table(n), cyclic_table(m))
            return F, Fp, len(points), f"G(Z/{n}^(Z/{m}), Z/{n} wr Z/{m})"
        raise ValueError(f"unknown preset {name!r}")
    if config.get("groups"):
        spec = config["groups"]
        F = _group_from_spec(spec["F"])
        Fp = _group_from_spec(spec["Fp"])
        deg = F.degree
        return F, Fp, deg, spec.get("label", "G(F, F')")
    gamma, a = config["wreath"]["gamma"], config["wreath"]["a"]
    F, Fp, points, _ = wreath_embedding(gamma, a)
    return F, Fp, len(points), "G(wreath pair)"


def _group_from_spec(spec) -> PermGroup:
    kind = spec["kind"]
    if kind == "symmetric":
        return PermGroup.symmetric(spec["degree"])
    if kind == "alternating":
        return PermGroup.alternating(spec["degree"])
    if kind == "cyclic":
        return PermGroup.cyclic(spec["degree"])
    if kind == "trivial":
        return PermGroup.trivial(spec["degree"])
    if kind == "listed":
        return PermGroup.generated([Perm.from_table(t) for t in spec["perms"]])
    if kind == "z_translations":
        return PermGroup.z_translations()
    if kind == "z_finitary":
        return PermGroup.z_finitary_affine()
    raise ValueError(f"unknown group kind {kind!r}")


def standard_generators(F: PermGroup, deg: int | None) -> list[TreeAut]:
    """A deterministic generating set for the universal group of F: constant
    portraits at the base vertex plus two rigid motions."""
    gens: list[TreeAut] = []
    if F.kind == "finite":
        gens += [TreeAut.from_constant(p, V0) for p in F.elements if not p.is_identity()]
    else:
        gens.append(TreeAut.from_constant(Perm.z_translation(1), V0))
    ident = Perm.identity(deg)
    gens.append(TreeAut.from_constant(ident, (0,)))
    gens.append(TreeAut.from_constant(ident, (0, 1)))
    return gens


@dataclass
class Certificate:
    """The desk-scale evidence bundle: group data, the witness pair and its
    defining edge, orbit truncation parameters, per-stage check results, and
    the depth caveats that qualify them."""

    config: dict
    group: dict
    edge: dict
    witness_a: dict | None
    witness_b: dict | None
    orbit: dict | None
    checks: dict
    caveats: list[str] = field(default_factory=list)
    status: str = "VALID"

    def to_dict(self) -> dict:
        return {
            "version": CERT_VERSION,
            "config": self.config,
            "group": self.group,
            "edge": self.edge,
            "witness_a": self.witness_a,
            "witness_b": self.witness_b,
            "orbit": self.orbit,
            "checks": self.checks,
            "caveats": self.caveats,
            "status": self.status,
        }


def normalize_config(config: dict) -> dict:
    out = {
        "preset": config.get("preset"),
        "groups": config.get("groups"),
        "wreath": config.get("wreath"),
        "word_length": int(config.get("word_length", 3)),
        "depth": int(config.get("depth", 16)),
        "seed": int(config.get("seed", 0)),
        "search_len": int(config.get("search_len", 3)),
    }
    if out["word_length"] < 1 or out["depth"] < 1:
        raise ValueError("numeric bounds must be positive")
    return out


def build_certificate(config: dict) -> Certificate:
    """Run the whole pipeline for one configuration.

    Stages: independent-hyperbolic witness search, half-tree fixator pair at
    a fixed edge, orbit truncation of the periodic end (01)^oo, the disjoint
    support check, the convolution annihilation identity, and the
    commutation of the pair.  The first failing stage marks the certificate
    INVALID.  Deterministic for a fixed config.
    """
    cfg = normalize_config(config)
    cert = Certificate(
        config=cfg, group={}, edge={}, witness_a=None, witness_b=None, orbit=None, checks={}
    )
    F, Fp, deg, label = resolve_groups(cfg)
    edge = DirectedEdge(V0, 0)
    stab_reason = None
    try:
        stab_reason = point_stabilizer(Fp, edge.color).amenability_reason
    except ValueError:
        stab_reason = "unavailable"
    cert.group = {
        "label": label,
        "omega": deg if deg is not None else "Z",
        "F": F.describe(),
        "Fp": Fp.describe(),
        "edge_stabilizer_amenability": stab_reason,
    }
    cert.edge = {"tail": list(edge.tail), "color": edge.color}

    gens = standard_generators(F, deg)
    witness = general_type_witness(gens, cfg["search_len"])
    cert.checks["general_type"] = {
        "found": witness is not None,
        "search_len": cfg["search_len"],
    }
    if witness is None:
        cert.status = "INVALID:general_type"
        return cert

    try:
        a, b = disjoint_support_pair(F, Fp, edge)
    except (ValueError, AssertionError) as exc:
        cert.status = "INVALID:fixator_witness"
        cert.checks["fixator_witness"] = {"error": str(exc)}
        return cert
    cert.witness_a = aut_to_data(a)
    cert.witness_b = aut_to_data(b)

    fix_a = fixes_half_tree_pointwise(a, HalfTree(edge.reversed()))
    fix_b = fixes_half_tree_pointwise(b, HalfTree(edge))
    cert.checks["half_tree_fixation"] = {"a_fixes_tail_side": fix_a, "b_fixes_head_side": fix_b}
    if not (fix_a and fix_b):
        cert.status = "INVALID:half_tree_fixation"
        return cert

    xi = PeriodicEnd((), (0, 1))
    orbit = orbit_truncate([a, b] + gens, xi, cfg["word_length"], cfg["depth"])
    cert.orbit = {
        "end": {"prefix": list(xi.prefix), "period": list(xi.period)},
        "word_length": orbit.word_length,
        "depth": orbit.depth,
        "points": len(orbit.points),
        "heuristic_bound": orbit.heuristic_bound,
        "depth_warning": orbit.depth_warning,
    }
    cert.caveats.append(f"orbit points identified by ray prefixes at depth {orbit.depth}")
    if orbit.depth_warning:
        cert.caveats.append(
            f"depth {orbit.depth} below the heuristic bound {orbit.heuristic_bound}"
        )

    disjoint = disjoint_support_check(a, b, orbit)
    cert.checks["disjoint_support"] = disjoint
    if not disjoint:
        cert.status = "INVALID:disjoint_support"
        return cert

    report = convolution_annihilation_check(a, b, orbit)
    cert.checks["annihilation"] = {
        "total": report.total,
        "passed": report.passed,
        "failures": [list(w) for w, _ in report.failures],
    }
    if not report.ok:
        cert.status = "INVALID:annihilation"
        return cert

    commute = (a * b) == (b * a)
    cert.checks["commute"] = commute
    if not commute:
        cert.status = "INVALID:commute"
        return cert

    cert.status = "VALID"
    return cert


# -- certificate (de)serialization ----------------------------------------------


def serialize_certificate(cert: Certificate) -> str:
    body = json.dumps(cert.to_dict(), sort_keys=True, indent=1)
    return f"{CERT_VERSION}\n{body}\n"


def parse_certificate(text: str) -> Certificate:
    header, _, body = text.partition("\n")
    if header.strip() != CERT_VERSION:
        raise ValueError(f"unsupported certificate version {header.strip()!r}")
    data = json.loads(body)
    if data.get("version") != CERT_VERSION:
        raise ValueError("certificate body version mismatch")
    return Certificate(
        config=data["config"],
        group=data["group"],
        edge=data["edge"],
        witness_a=data["witness_a"],
        witness_b=data["witness_b"],
        orbit=data["orbit"],
        checks=data["checks"],
        caveats=data["caveats"],
        status=data["status"],
    )


def verify_certificate(text: str) -> tuple[bool, str]:
    """Re-run the pipeline from the embedded config and compare bit-for-bit."""
    cert = parse_certificate(text)
    rebuilt = build_certificate(cert.config)
    if serialize_certificate(rebuilt) == text:
        return True, "certificate re-verified bit-identically"
    return False, "re-run disagrees with the stored certificate"


def certificate_witnesses(cert: Certificate) -> tuple[TreeAut, TreeAut]:
    return aut_from_data(cert.witness_a), aut_from_data(cert.witness_b)
