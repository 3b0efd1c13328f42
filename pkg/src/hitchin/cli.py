"""Command-line entry point.

Subcommands build representation files, deform them inside the relation
variety, run the certification suite with a quantitative JSON report,
and export sample tables (CSV) and leaf renders (SVG).  Exit codes are a
stable contract: 0 for success, 1 for certification failures (including
non-convergence), 2 for malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .contact import definiteness_check, j_from_lagrangians, lagrangian_residual
from .contact import contact_plane, oriented_form
from .devmap import (
    classify,
    dev,
    dev_prime,
    dev_table_csv,
    equivariance_residual,
    leaf_boundary,
    leaf_to_svg,
    sector_check,
    xi1_from_lines,
    xi2_recover,
)
from .errors import (
    GeometryError,
    NoConvergence,
    NoInvariantForm,
    NotConvexSamples,
    NotProperlyConvex,
)
from .frenet import (
    check_sum_partitions,
    curve_to_csv,
    dual_curve,
    flag_equivariance_residual,
    sample_curve,
)
from .projective import ProjLine, ProjPlane, ProjPoint, chordal, meet_planes
from .reps import (
    Rep4,
    SplitMix64,
    deform,
    diag_rep,
    invariant_symplectic,
    relation_residual,
    sym3_rep,
)
from .surface import (
    BoundaryPoint,
    BoundaryTriple,
    Rep2,
    enumerate_words,
    fuchsian_octagon,
)
from .tolerances import PROFILES

__all__ = ["InputError", "RepFile", "main"]

# Direct-sum partitions certified on sampled flag tuples.
PARTITIONS = ((1, 1, 1, 1), (1, 1, 2), (1, 3), (2, 2), (1, 2),
              (1, 1, 1), (2,), (3,), (1,))


class InputError(ValueError):
    """Malformed input file or argument combination (exit code 2)."""


class RepFile:
    """JSON-backed representation container.

    Fields mirror the on-disk format: ``genus`` (always 2 here), ``kind``
    (``sl2`` or ``sl4``), ``generators`` as row-major nested lists, and a
    free-form ``metadata`` mapping carrying seed/eps/provenance.  The
    relation residual is computed on load and exposed as ``residual``.
    """

    def __init__(self, genus: int, kind: str, generators, metadata):
        if kind not in ("sl2", "sl4"):
            raise InputError(f"unknown kind {kind!r}")
        if genus != 2:
            raise InputError(f"unsupported genus {genus}")
        size = 2 if kind == "sl2" else 4
        mats = []
        for i, g in enumerate(generators):
            m = np.asarray(g, dtype=float)
            if m.shape != (size, size):
                raise InputError(
                    f"generator {i} has shape {m.shape}, expected"
                    f" ({size}, {size})")
            if not np.all(np.isfinite(m)):
                raise InputError(f"generator {i} has non-finite entries")
            mats.append(m)
        if len(mats) != 4:
            raise InputError(f"expected 4 generators, got {len(mats)}")
        self.genus = genus
        self.kind = kind
        self.generators = mats
        self.metadata = dict(metadata)
        try:
            self.residual = relation_residual(self.to_rep())
        except GeometryError as exc:
            raise InputError(f"invalid generators: {exc}") from exc

    def to_rep(self):
        provenance = self.metadata.get("provenance", "file")
        if self.kind == "sl2":
            return Rep2(self.generators)
        return Rep4(self.generators, provenance)

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "kind": self.kind,
            "generators": [m.tolist() for m in self.generators],
            "metadata": self.metadata,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RepFile":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: top level must be an object")
        missing = {"genus", "kind", "generators"} - set(data)
        if missing:
            raise InputError(f"{path}: missing fields {sorted(missing)}")
        try:
            return cls(data["genus"], data["kind"], data["generators"],
                       data.get("metadata", {}))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"{path}: {exc}") from exc


def _load_sl4(path) -> tuple[RepFile, Rep4]:
    rf = RepFile.load(path)
    if rf.kind != "sl4":
        raise InputError(f"{path}: this command needs an sl4 representation")
    print(f"relation residual: {rf.residual:.3e}", file=sys.stderr)
    return rf, rf.to_rep()


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_rep(args) -> int:
    base = fuchsian_octagon()
    rep = sym3_rep(base) if args.kind == "model" else diag_rep(base)
    rf = RepFile(2, "sl4", [g for g in rep.images],
                 {"provenance": rep.provenance, "seed": None, "eps": None})
    rf.save(args.out)
    print(f"wrote {args.out} (relation residual {rf.residual:.3e})")
    return 0


def cmd_deform(args) -> int:
    if args.eps is None or args.seed is None:
        raise InputError("deform requires --eps and --seed")
    if not 0.0 <= args.eps <= 1e-2:
        raise InputError(f"eps {args.eps} outside [0, 1e-2]")
    rf, rep = _load_sl4(args.rep)
    try:
        deformed = deform(rep, seed=args.seed, eps=args.eps)
    except NoConvergence as exc:
        print(f"deformation did not converge: {exc}", file=sys.stderr)
        return 1
    out = RepFile(2, "sl4", [g for g in deformed.images],
                  {"provenance": deformed.provenance, "seed": args.seed,
                   "eps": args.eps})
    out.save(args.out)
    print(f"wrote {args.out} (relation residual {out.residual:.3e})")
    return 0


def _triple_indices(n_angles, angles, rng: SplitMix64):
    """Three sorted distinct sample indices with separated angles."""
    while True:
        idx = sorted({rng.next_u64() % n_angles for _ in range(3)})
        if len(idx) < 3:
            continue
        a = angles[idx]
        if (a[1] - a[0] < 0.05 or a[2] - a[1] < 0.05
                or a[0] + np.pi - a[2] < 0.05):
            continue
        return idx


def _certify_checks(rep: Rep4, max_len: int, tol) -> tuple[list, dict]:
    """Run the certification suite; returns (checks, extras)."""
    checks = []
    extras = {}

    def add(name, passed, value, threshold, note=""):
        checks.append({"name": name, "passed": bool(passed),
                       "value": float(value) if np.isfinite(value) else None,
                       "threshold": threshold, "note": note})

    r = relation_residual(rep)
    add("relation_residual", r < tol.relation, r, tol.relation)
    if not checks[-1]["passed"]:
        extras["skipped"] = "relation residual failed; suite not run"
        return checks, extras

    if rep.provenance == "diagonal":
        verdict = sector_check(rep)
        add("sector_collinearity", verdict.collinearity_margin < 1e-10,
            verdict.collinearity_margin, 1e-10)
        add("sector_convexity", verdict.convexity_margin > 0.0,
            verdict.convexity_margin, 0.0)
        add("sector_limits", verdict.limit_mismatch < 1e-6,
            verdict.limit_mismatch, 1e-6)
        add("properly_convex", verdict.properly_convex, 0.0, 1.0,
            note="orbit closure contains a full projective line")
        extras["description"] = verdict.description
        return checks, extras

    base = fuchsian_octagon()
    try:
        curve = sample_curve(rep, base, max_len)
    except GeometryError as exc:
        add("frenet_sampling", False, float("nan"), 16, note=str(exc))
        return checks, extras
    add("frenet_sampling", len(curve) >= 16, len(curve), 16,
        note=f"skipped words: {curve.skipped}")

    rng = SplitMix64(0xC0FFEE)
    n = len(curve)
    for partition in PARTITIONS:
        margin = np.inf
        for _ in range(40):
            picks = set()
            while len(picks) < len(partition):
                picks.add(rng.next_u64() % n)
            margin = min(margin,
                         check_sum_partitions(curve, partition, sorted(picks)))
        add(f"partition_{'_'.join(map(str, partition))}", margin > 0.0,
            margin, 0.0)

    dual = dual_curve(curve)
    margin = np.inf
    for _ in range(40):
        picks = set()
        while len(picks) < 4:
            picks.add(rng.next_u64() % n)
        margin = min(margin,
                     check_sum_partitions(dual, (1, 1, 1, 1), sorted(picks)))
    add("dual_partition_1_1_1_1", margin > 0.0, margin, 0.0)

    eig_ok = True
    worst_gap = np.inf
    for wd in enumerate_words(min(max_len, 4)):
        lam = np.linalg.eigvals(rep.eval(wd))
        if np.max(np.abs(lam.imag)) > 1e-8 * np.max(np.abs(lam)):
            eig_ok = False
            break
        lam = lam.real
        if not (np.all(lam > 0) or np.all(lam < 0)):
            eig_ok = False
            break
        mods = np.sort(np.abs(lam))[::-1]
        worst_gap = min(worst_gap, float(np.min(mods[:-1] / mods[1:]) - 1.0))
    add("eigenvalue_law", eig_ok and worst_gap > tol.gap_margin,
        worst_gap, tol.gap_margin,
        note="4 real, same sign, strictly decreasing moduli")

    eq_val, matched = flag_equivariance_residual(curve)
    add("flag_equivariance", eq_val < tol.flag_match, eq_val, tol.flag_match,
        note=f"{matched} matched pairs")

    dev_eq = equivariance_residual(rep, curve, 10)
    add("dev_equivariance", dev_eq < tol.flag_match, dev_eq, tol.flag_match)

    angles = curve.angles
    ok = 0
    total = 64
    for _ in range(total):
        idx = _triple_indices(n, angles, rng)
        triple = BoundaryTriple(*[BoundaryPoint(angles[i]) for i in idx])
        try:
            c_dev = classify(dev(triple, curve).point, curve)
            c_prm = classify(dev_prime(triple, curve).point, curve)
        except GeometryError:
            continue
        ok += (c_dev == "Omega" and c_prm == "Lambda")
    add("classification", ok == total, ok, total,
        note="dev -> Omega, dev' -> Lambda")

    worst_x1 = 0.0
    worst_x2 = 0.0
    for _ in range(8):
        idx = _triple_indices(n, angles, rng)
        ts = [BoundaryPoint(angles[i]) for i in idx]
        rec = xi1_from_lines(ts[0], ts[1], ts[2], curve)
        worst_x1 = max(worst_x1,
                       chordal(rec.coords, curve.points[idx[0]]))
        line = xi2_recover(ts[0], ts[1], curve)
        worst_x2 = max(worst_x2,
                       chordal(line.pluecker, curve.lines[idx[1]]))
    add("xi1_recovery", worst_x1 < tol.flag_match, worst_x1, tol.flag_match)
    add("xi2_recovery", worst_x2 < tol.flag_match, worst_x2, tol.flag_match)

    try:
        leaf = leaf_boundary(BoundaryPoint(angles[0]), curve, 48)
        add("leaf_convexity", leaf.convexity_margin > 0.0,
            leaf.convexity_margin, 0.0)
        add("leaf_properly_convex", True, 1.0, 1.0,
            note="separating plane witness found")
    except (NotConvexSamples, NotProperlyConvex) as exc:
        add("leaf_convexity", False, float("nan"), 0.0, note=str(exc))

    try:
        omega = oriented_form(curve)
    except NoInvariantForm as exc:
        applicable = rep.provenance == "irreducible"
        if applicable:
            add("symplectic_form", False, float("nan"), 1, note=str(exc))
        else:
            extras["symplectic"] = f"not applicable: {exc}"
    else:
        add("symplectic_form", True, 1, 1, note="1-dimensional solution")
        worst = 0.0
        for _ in range(64):
            i = rng.next_u64() % n
            worst = max(worst, lagrangian_residual(ProjLine(curve.lines[i]),
                                                   omega))
        add("lagrangian_xi2", worst < tol.eigen_residual, worst,
            tol.eigen_residual)
        idx = _triple_indices(n, angles, rng)
        structure = j_from_lagrangians(
            *[ProjLine(curve.lines[i]) for i in idx])
        sq = structure.square_residual()
        scale = max(1.0, float(np.linalg.norm(structure.j)) ** 2)
        add("complex_structure_square", sq < 1e-9 * scale, sq, 1e-9 * scale)
        min_eig, min_sample = definiteness_check(omega, structure)
        add("taming_positivity", min_eig > 0.0 and min_sample > 0.0,
            min_eig, 0.0)
        worst = 0.0
        for _ in range(64):
            i = rng.next_u64() % n
            h = contact_plane(ProjPoint(curve.points[i]), omega)
            worst = max(worst, chordal(h.covector, curve.planes[i]))
        add("contact_plane_xi3", worst < tol.flag_match, worst,
            tol.flag_match)

    return checks, extras


def cmd_certify(args) -> int:
    rf, rep = _load_sl4(args.rep)
    tol = PROFILES[args.tolerance_profile]
    checks, extras = _certify_checks(rep, args.max_word_len, tol)
    overall = all(c["passed"] for c in checks)
    report = {
        "parameters": {
            "rep": str(args.rep),
            "max_word_len": args.max_word_len,
            "tolerance_profile": args.tolerance_profile,
        },
        "relation_residual_on_load": rf.residual,
        "checks": checks,
        "overall": overall,
    }
    report.update(extras)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in checks:
        status = "pass" if c["passed"] else "FAIL"
        print(f"  {status}  {c['name']}: {c['value']}", file=sys.stderr)
    if "description" in extras:
        print(f"verdict: {extras['description']}", file=sys.stderr)
    return 0 if overall else 1


def cmd_render_leaf(args) -> int:
    _, rep = _load_sl4(args.rep)
    curve = sample_curve(rep, fuchsian_octagon(), args.max_word_len)
    t = BoundaryPoint(args.t)
    leaf = leaf_boundary(t, curve, args.samples)
    marked = np.linspace(0, len(leaf.samples), 8, endpoint=False).astype(int)
    tangents = []
    for k in marked:
        t_prime, _ = leaf.samples[k]
        i = curve.locate(t_prime)
        tangents.append(meet_planes(leaf.plane, ProjPlane(curve.planes[i])))
    leaf_to_svg(leaf, args.out, tangents=tangents)
    print(f"wrote {args.out} ({len(leaf.samples)} boundary samples,"
          f" {len(tangents)} tangents)")
    return 0


def cmd_sample(args) -> int:
    _, rep = _load_sl4(args.rep)
    curve = sample_curve(rep, fuchsian_octagon(), args.max_word_len)
    if args.what == "curve":
        curve_to_csv(curve, args.out)
        print(f"wrote {args.out} ({len(curve)} flag samples)")
        return 0
    rng = SplitMix64(args.seed)
    angles = curve.angles
    rows = []
    for _ in range(args.samples):
        idx = _triple_indices(len(curve), angles, rng)
        triple = BoundaryTriple(*[BoundaryPoint(angles[i]) for i in idx])
        if args.what == "dev":
            point = dev(triple, curve).point
        else:
            point = dev_prime(triple, curve).point
        rows.append((triple, point.coords, classify(point, curve)))
    dev_table_csv(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hitchin",
        description="Convex foliated projective structures: build, certify,"
                    " sample, render.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-rep", help="write a built-in representation file")
    p.add_argument("kind", choices=("model", "diagonal"))
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_gen_rep)

    p = sub.add_parser("deform", help="deform a representation inside the"
                                      " relation variety")
    p.add_argument("--rep", required=True, help="input JSON rep file")
    p.add_argument("--seed", type=_u64, required=True, help="64-bit seed")
    p.add_argument("--eps", type=float, required=True,
                   help="deformation size, at most 1e-2")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("certify", help="run the certification suite")
    p.add_argument("--rep", required=True, help="input JSON rep file")
    p.add_argument("--max-word-len", type=int, default=5)
    p.add_argument("--tolerance-profile", choices=sorted(PROFILES),
                   default="default")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("render-leaf", help="render a leaf boundary as SVG")
    p.add_argument("--rep", required=True, help="input JSON rep file")
    p.add_argument("--t", type=float, default=0.0,
                   help="leaf parameter angle in [0, pi)")
    p.add_argument("--samples", type=int, default=64,
                   help="boundary sample count (>= 16)")
    p.add_argument("--max-word-len", type=int, default=5)
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_render_leaf)

    p = sub.add_parser("sample", help="write flag or developing-map samples"
                                      " as CSV")
    p.add_argument("--rep", required=True, help="input JSON rep file")
    p.add_argument("--what", choices=("curve", "dev", "devprime"),
                   required=True)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--max-word-len", type=int, default=5)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
