"""Batch front-end: parse a run configuration, drive the pipeline, and emit
certificates and human-readable reports.

Subcommands: certify (full pipeline to a certificate file), classify (isometry
type and class membership of one element), orbit (truncated boundary orbit),
witness (half-tree fixator witnesses, or the branch-swap element over the
free-product preset "pslz").  Configs are JSON files; the same data can be
given by flags.  Exit status: 0 success/VALID, 1 pipeline INVALID, 2 parse or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cstar_obstruction import (
    build_certificate,
    fixator_witness,
    normalize_config,
    orbit_truncate,
    resolve_groups,
    serialize_certificate,
    standard_generators,
    verify_certificate,
)
from .dynamics import Elliptic, Inversion, classify_isometry
from .perm_groups import point_stabilizer
from .piecewise import FreeProductTree, psl2z_tree, pw_half_tree_fixator
from .portraits import GroupClass, TreeAut, aut_from_data, aut_to_data
from .tree_core import V0, DirectedEdge, HalfTree, PeriodicEnd


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arboreal",
        description="certificates for prescribed-local-action tree groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("certify", "run the full pipeline and write a certificate"),
        ("classify", "classify one element and report class membership"),
        ("orbit", "print a truncated boundary orbit"),
        ("witness", "construct and print a half-tree fixator witness"),
        ("verify", "re-run a stored certificate and compare"),
    ]:
        p = sub.add_parser(name, help=helptext)
        if name != "verify":
            p.add_argument("--preset", help="named group preset, e.g. g-alt3-sym3")
            p.add_argument("--config", help="path to a JSON config file")
            p.add_argument("--word-length", type=int, default=None)
            p.add_argument("--depth", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="output path")
        if name == "classify":
            p.add_argument("--element", required=True,
                           help="serialized element (JSON) or word in g0, g1, ... with ^-1")
        if name == "verify":
            p.add_argument("certificate", help="path to a certificate file")
    return parser


def _load_config(args) -> dict:
    config: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
    if getattr(args, "preset", None):
        if config.get("preset") and config["preset"] != args.preset:
            raise ValueError("preset given both in the config file and on the command line")
        config["preset"] = args.preset
    for key, flag in [("word_length", "word_length"), ("depth", "depth"), ("seed", "seed")]:
        value = getattr(args, flag, None)
        if value is not None:
            config[key] = value
    return config


def _parse_element(text: str, gens: list[TreeAut], deg) -> TreeAut:
    text = text.strip()
    if text == "identity":
        return TreeAut.identity(deg)
    if text.startswith("{"):
        return aut_from_data(json.loads(text))
    el = TreeAut.identity(deg)
    for token in text.split():
        inverse = token.endswith("^-1")
        name = token[:-3] if inverse else token
        if not name.startswith("g"):
            raise ValueError(f"bad generator token {token!r}")
        idx = int(name[1:])
        if not 0 <= idx < len(gens):
            raise ValueError(f"generator index {idx} out of range (have {len(gens)})")
        factor = gens[idx].inverse() if inverse else gens[idx]
        el = el * factor
    return el


def _write_or_print(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    config = normalize_config(_load_config(args))
    cert = build_certificate(config)
    text = serialize_certificate(cert)
    out_path = args.out or "certificate.txt"
    with open(out_path, "w") as fh:
        fh.write(text)
    print(f"group: {cert.group.get('label', '?')}")
    for stage, result in sorted(cert.checks.items()):
        print(f"check {stage}: {result}")
    for caveat in cert.caveats:
        print(f"caveat: {caveat}")
    print(f"status: {cert.status}")
    print(f"certificate written to {out_path}")
    return 0 if cert.status == "VALID" else 1


def cmd_classify(args) -> int:
    config = _load_config(args)
    F, Fp, deg, label = resolve_groups(config)
    gens = standard_generators(F, deg)
    g = _parse_element(args.element, gens, deg)
    cls = classify_isometry(g)
    if isinstance(cls, Elliptic):
        vname = "".join(map(str, cls.fixed_vertex)) or "v0"
        print(f"isometry type: elliptic, fixes vertex {vname}")
        print("translation length: 0")
    elif isinstance(cls, Inversion):
        tail = "".join(map(str, cls.edge.tail)) or "v0"
        print(f"isometry type: inversion of the color-{cls.edge.color} edge at {tail}")
        print("translation length: 0")
    else:
        print("isometry type: hyperbolic")
        print(f"translation length: {cls.length}")
    flags = {
        "U(F)": GroupClass.universal(F).contains(g),
        "G(F,F')": GroupClass.prescribed(F, Fp).contains(g),
        "G(F,F')*": GroupClass.prescribed_star(F, Fp).contains(g),
    }
    for name, member in flags.items():
        print(f"member of {name}: {'yes' if member else 'no'}")
    return 0


def cmd_orbit(args) -> int:
    config = normalize_config(_load_config(args))
    F, Fp, deg, label = resolve_groups(config)
    gens = standard_generators(F, deg)
    xi = PeriodicEnd((), (0, 1))
    orbit = orbit_truncate(gens, xi, config["word_length"], config["depth"])
    print(f"group: {label}")
    print(f"end: {xi!r}, word length {orbit.word_length}, depth {orbit.depth}")
    if orbit.depth_warning:
        print(f"warning: depth below heuristic bound {orbit.heuristic_bound}")
    print(f"points: {len(orbit.points)}")
    lines = []
    for word, _, pref in orbit.points:
        wname = ".".join(map(str, word)) or "e"
        lines.append(f"  {wname}: {''.join(map(str, pref))}")
    output = "\n".join(lines) + "\n"
    _write_or_print(output, args.out)
    return 0


def cmd_witness(args) -> int:
    config = _load_config(args)
    if config.get("preset") == "pslz" or config.get("free_product"):
        if config.get("free_product"):
            tables = config["free_product"]
            tree = FreeProductTree(tables["a"], tables["b"])
        else:
            tree = psl2z_tree()
        side = 1 if len(tree.tables[1]) >= 3 else 0
        v = (side, ())
        rotor = tree.letter(side, next(
            i for i in range(len(tree.tables[side])) if i != tree.ident[side]
        ))
        n1 = (1 - side, ())
        gamma = pw_half_tree_fixator(tree, rotor, v, n1, tree.act(rotor, n1))
        ok, msg = gamma.validate()
        sizes = (len(tree.tables[0]), len(tree.tables[1]))
        print(f"branch-swap element over the {sizes}-biregular free-product tree")
        print(f"valid: {ok} ({msg})")
        print(f"nontrivial: {not gamma.is_identity()}")
        third = next(n for n in tree.neighbors(v) if n not in (n1, tree.act(rotor, n1)))
        print(f"fixes the half-tree beyond {third}: {gamma.fixes_half_tree((v, third))}")
        return 0
    F, Fp, deg, label = resolve_groups(config)
    h = HalfTree(DirectedEdge(V0, 0))
    g = fixator_witness(F, Fp, h)
    stab = point_stabilizer(Fp, 0)
    print(f"group: {label}")
    print(f"witness fixing the half-tree at edge (v0, color 0); stabilizer reason: "
          f"{stab.amenability_reason}")
    data = json.dumps(aut_to_data(g), sort_keys=True)
    _write_or_print(data + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    with open(args.certificate) as fh:
        text = fh.read()
    ok, msg = verify_certificate(text)
    print(msg)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "certify": cmd_certify,
        "classify": cmd_classify,
        "orbit": cmd_orbit,
        "witness": cmd_witness,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
