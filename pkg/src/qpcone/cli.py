"""Command-line interface: ``qpcone <command> ...``.

Every command prints a JSON report.  Reports carry no timestamps or timings
unless ``--timing`` is given, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import example26
from .cancellation import Inconclusive, SearchLimits, find_cck_star_violation, find_cck_violation
from .complexes import SimplicialComplex, all_complexes, has_shift_obstruction, is_shifted, shift_closure
from .core import Subset, TernaryVector, TradingTransform, characteristic_vector
from .feasibility import (
    is_almost_representable,
    is_representable,
    is_threshold,
    verify_almost_representing_measure,
    verify_representing_measure,
    verify_threshold_certificate,
)
from .qporder import (
    QPOrder,
    UntieError,
    check_qp_axioms,
    complete_untying_set,
    cone_of,
    hyperplane_section,
    initial_segment,
    load_order,
    order_from_weights,
    untie,
    verify_cone_axioms,
    verify_qp_axioms,
)
from .winder import grid_game_complex, is_strongly_acyclic, probe_extension, random_complex, winder_prec


class InputError(Exception):
    """Unreadable or malformed input; reported on stderr with exit code 2."""


def _read_json(path: str) -> tuple[object, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return data, hashlib.sha256(raw).hexdigest()


def _load_complex(path: str) -> tuple[SimplicialComplex, str]:
    data, digest = _read_json(path)
    try:
        return SimplicialComplex.from_json(data), digest
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a complex: {exc}") from exc


def _load_order(path: str) -> tuple[QPOrder, dict, str]:
    data, digest = _read_json(path)
    try:
        return load_order(data), data, digest
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: not an order: {exc}") from exc


def _report(command: str, digest: str | None, verdict: str, **extra) -> dict:
    return {"command": command, "inputs_digest": digest, "verdict": verdict, **extra}


def _limits(args) -> SearchLimits:
    max_k = max(getattr(args, "max_k", 4), getattr(args, "k", 2), 2)
    return SearchLimits(max_k=max_k, node_budget=args.budget, deterministic_seed=args.seed)


def _star_search(delta: SimplicialComplex, limits: SearchLimits, max_k: int):
    for k in range(2, max_k + 1):
        try:
            found = find_cck_star_violation(delta, k, limits)
        except Inconclusive:
            return "inconclusive"
        if found is not None:
            return {"k": k, **found.to_json()}
    return None


# -- commands ------------------------------------------------------------------


def cmd_threshold(args) -> tuple[dict, int]:
    delta, digest = _load_complex(args.complex)
    cert = is_threshold(delta)
    if cert.feasible:
        assert verify_threshold_certificate(delta, cert)
        return _report("threshold", digest, "threshold", certificate=cert.to_json()), 0
    witness = _star_search(delta, _limits(args), args.max_k)
    if witness is None:
        witness = "inconclusive"
    return _report("threshold", digest, "not threshold", witness=witness), 0


def cmd_shifted(args) -> tuple[dict, int]:
    delta, digest = _load_complex(args.complex)
    order = is_shifted(delta)
    if order is not None:
        return _report("shifted", digest, "shifted", certificate={"vertex_order": order}), 0
    i, j, a, b = has_shift_obstruction(delta)
    return _report("shifted", digest, "not shifted", witness={"i": i, "j": j, "A": a.to_json(), "B": b.to_json()}), 0


def cmd_cancel(args) -> tuple[dict, int]:
    limits = _limits(args)
    try:
        if args.complex:
            delta, digest = _load_complex(args.complex)
            found = find_cck_star_violation(delta, args.k, limits)
        else:
            order, _, digest = _load_order(args.order)
            found = find_cck_violation(order, args.k, limits)
    except Inconclusive as exc:
        return _report("cancel", digest, "inconclusive", nodes=exc.nodes), 0
    if found is None:
        return _report("cancel", digest, "none", k=args.k), 0
    return _report("cancel", digest, "violation", k=args.k, witness=found.to_json()), 0


def cmd_order_check(args) -> tuple[dict, int]:
    order, _, digest = _load_order(args.order)
    axioms = check_qp_axioms(order)
    if not axioms.ok:
        return _report("order-check", digest, "invalid", witness=axioms.to_json()), 0
    rep = is_representable(order)
    if rep.feasible:
        assert verify_representing_measure(order, rep.weights)
    almost = is_almost_representable(order)
    if almost.feasible:
        assert verify_almost_representing_measure(order, almost.weights)
    ties = [[s.to_json() for s in cls] for cls in order.ties()]
    return (
        _report(
            "order-check",
            digest,
            "valid",
            representable=rep.to_json(),
            almost_representable=almost.to_json(),
            ties=ties,
        ),
        0,
    )


def cmd_untie(args) -> tuple[dict, int]:
    order, data, digest = _load_order(args.order)
    if "weights" not in data:
        raise InputError(f"{args.order}: untie needs an order given by weights")
    weights = data["weights"]
    keep_data, _ = _read_json(args.keep) if args.keep else ([], None)
    keep = {TernaryVector.from_entries(v) for v in keep_data}
    if args.complete:
        completed = complete_untying_set(hyperplane_section(order, weights), keep)
        if completed is None:
            return _report("untie", digest, "rejected", witness="no closed completion of the kept vectors"), 0
        keep = set(completed)
    try:
        new = untie(order, keep, weights)
    except UntieError as exc:
        wit = [v.to_json() if isinstance(v, TernaryVector) else str(v) for v in exc.witness]
        return _report("untie", digest, "rejected", reason=str(exc), witness=wit), 0
    return (
        _report(
            "untie",
            digest,
            "untied",
            linear=new.is_linear(),
            kept=sorted(v.to_json() for v in keep if not v.is_zero()),
            order=new.to_json(),
        ),
        0,
    )


def cmd_example26(args) -> tuple[dict, int]:
    if args.action == "build":
        c = example26.default_construction(int(args.selector, 16))
        report = example26.verify_construction(c)
        out = c.to_json()
        out["report"] = report.to_json()
        return _report("example26 build", None, report.conclusion, construction=out), 0 if report.ok else 1
    if args.input:
        data, digest = _read_json(args.input)
        try:
            c = example26.Construction.from_json(data.get("construction", data))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.input}: not a construction: {exc}") from exc
    else:
        c, digest = example26.default_construction(), None
    report = example26.verify_construction(c)
    return _report("example26 verify", digest, report.conclusion, report=report.to_json()), 0 if report.ok else 1


def cmd_winder(args) -> tuple[dict, int]:
    delta, digest = _load_complex(args.complex)
    rep = is_strongly_acyclic(delta)
    out = rep.to_json()
    if not args.cycle_witness:
        out.pop("cycle")
    extra = {"probe": probe_extension(delta).to_json()} if args.probe else {}
    return _report("winder", digest, out.pop("verdict"), **out, **extra), 0


# -- worked-example reproduction ------------------------------------------------


def _fixture_dir(args) -> Path:
    if args.fixtures:
        return Path(args.fixtures)
    return Path(str(resources.files("qpcone") / "fixtures"))


def _subset(n: int, label: str) -> Subset:
    return Subset.of(n, [int(c) for c in label])


def _section_tied_weights(fx: Path, seed: int) -> dict:
    order, data, _ = _load_order(str(fx / "tied_weights_n5.json"))
    w = data["weights"]
    listed = [("35", "2"), ("25", "34"), ("23", "15"), ("14", "235")]
    has_listed = all(order.sim(_subset(5, a), _subset(5, b)) for a, b in listed)
    tie_3_45 = order.sim(_subset(5, "3"), _subset(5, "45"))
    rep = is_representable(order)
    u = [characteristic_vector(_subset(5, b), _subset(5, a)) for a, b in listed]
    section = hyperplane_section(order, w)
    keep = complete_untying_set(section, u)
    linear = untie(order, keep, w) if keep is not None else None
    ok = (
        verify_qp_axioms(order)
        and has_listed
        and rep.feasible
        and verify_representing_measure(order, rep.weights)
        and linear is not None
        and linear.is_linear()
        and verify_qp_axioms(linear)
    )
    return {
        "ok": ok,
        "listed_ties_present": has_listed,
        "extra_tie_3_45": tie_3_45,
        "tie_classes": len(order.ties()),
        "section_size": len(section),
        "untied_linear": None if linear is None else linear.is_linear(),
    }


def _section_swapped_order(fx: Path, seed: int) -> dict:
    order, _, _ = _load_order(str(fx / "swapped_order_n5.json"))
    rep = is_representable(order)
    almost = is_almost_representable(order)
    violation = None
    for k in range(2, 5):
        found = find_cck_violation(order, k)
        if found is not None:
            violation = {"k": k, **found.to_json()}
            break
    seg = initial_segment(order, _subset(5, "12"))
    seg_ok = sorted(seg.faces) == sorted(s.bits for s in (Subset(5, 0), *(Subset.of(5, [i]) for i in range(1, 5))))
    ok = (
        verify_qp_axioms(order)
        and not rep.feasible
        and almost.feasible
        and verify_almost_representing_measure(order, almost.weights)
        and violation is not None
        and seg_ok
    )
    return {"ok": ok, "representable": rep.feasible, "almost_representable": almost.feasible, "violation": violation}


def _section_magic_square(fx: Path, seed: int) -> dict:
    order, data, _ = _load_order(str(fx / "magic_square_weights.json"))
    w = data["weights"]
    x = [
        characteristic_vector(_subset(9, "123"), _subset(9, "147")),
        characteristic_vector(_subset(9, "456"), _subset(9, "258")),
        characteristic_vector(_subset(9, "789"), _subset(9, "369")),
    ]
    try:
        untie(order, set(x), w)
        witness = None
    except UntieError as exc:
        witness = exc.witness
    cone_report = verify_cone_axioms(cone_of(order).without({-v for v in x}))
    ok = witness == (x[0], x[1], -x[2]) and not cone_report.d3
    return {"ok": ok, "witness": None if witness is None else [v.to_json() for v in witness], "d3_after_removal": cone_report.d3}


REFERENCE_TRANSFORM = ([[1, 5, 7], [2, 3, 4, 6]], [[3, 4, 7], [1, 2, 5, 6]])


def _section_shifted_n7(fx: Path, seed: int) -> dict:
    gens = [Subset.of(7, [1, 5, 7]), Subset.of(7, [2, 3, 4, 6])]
    delta = shift_closure(7, gens)
    stored, _ = _load_complex(str(fx / "shifted_n7_complex.json"))
    order = is_shifted(delta)
    inside = all(g in delta for g in gens)
    outside = not any(Subset.of(7, b) in delta for b in REFERENCE_TRANSFORM[1])
    listed = TradingTransform(tuple(Subset.of(7, a) for a in REFERENCE_TRANSFORM[0]), tuple(Subset.of(7, b) for b in REFERENCE_TRANSFORM[1]))
    reference_ok = all(a in delta for a in listed.left) and not any(b in delta for b in listed.right)
    found = find_cck_star_violation(delta, 2)
    thr = is_threshold(delta)
    ok = stored.faces == delta.faces and order is not None and inside and outside and reference_ok and found is not None and not thr.feasible
    matches = found is not None and found.canonical() == listed.canonical()
    return {
        "ok": ok,
        "faces": len(delta),
        "shifting_order": order,
        "reference_transform_is_witness": reference_ok,
        "search_witness": None if found is None else found.to_json(),
        "search_matches_reference": matches,
        "threshold": thr.feasible,
    }


def _section_example26(fx: Path, seed: int) -> dict:
    data, _ = _read_json(str(fx / "example26.json"))
    stored = example26.Construction.from_json(data)
    fresh = example26.default_construction()
    report = example26.verify_construction(stored)
    mono = example26.sample_monotonicity(stored, 20_000, seed)
    ok = report.ok and stored.to_json() == fresh.to_json() and mono is None
    failed = [k for k, r in report.checks.items() if r.ok is False]
    return {"ok": ok, "conclusion": report.conclusion, "failed_checks": failed, "matches_fresh_build": stored.to_json() == fresh.to_json()}


def _section_winder(fx: Path, seed: int) -> dict:
    rng = random.Random(seed)
    faces_below = True
    for n in range(1, 5):
        for delta in all_complexes(n):
            faces = delta.faces
            for a in faces:
                for b in range(1 << n):
                    if b not in faces and not winder_prec(delta, Subset(n, a), Subset(n, b)):
                        faces_below = False
    translation = True
    for _ in range(1000):
        n = rng.randint(2, 6)
        delta = random_complex(n, rng)
        a, b = rng.getrandbits(n), rng.getrandbits(n)
        d = rng.getrandbits(n) & ~(a | b)
        lhs = winder_prec(delta, Subset(n, a), Subset(n, b))
        rhs = winder_prec(delta, Subset(n, a | d), Subset(n, b | d))
        translation &= lhs == rhs
    thm72 = True
    for _ in range(40):
        n = rng.randint(2, 6)
        w = [Fraction(rng.randint(1, 30)) for _ in range(n)]
        order = order_from_weights(w)
        t = Subset(n, rng.getrandbits(n))
        thm72 &= is_strongly_acyclic(initial_segment(order, t)).acyclic
    grid = is_strongly_acyclic(grid_game_complex())
    ok = faces_below and translation and thm72 and not grid.acyclic
    return {
        "ok": ok,
        "faces_below_nonfaces": faces_below,
        "translation_invariance": translation,
        "segments_acyclic": thm72,
        "grid_game_cycle": None if grid.cycle is None else [s.to_json() for s in grid.cycle],
    }


SECTIONS = {
    "tied_weights": _section_tied_weights,
    "swapped_order": _section_swapped_order,
    "magic_square_untie": _section_magic_square,
    "shifted_n7": _section_shifted_n7,
    "example26": _section_example26,
    "winder": _section_winder,
}


def _run_section(name: str, fx: str, seed: int) -> dict:
    try:
        return SECTIONS[name](Path(fx), seed)
    except InputError as exc:
        return {"ok": False, "error": str(exc)}


def cmd_reproduce(args) -> tuple[dict, int]:
    fx = str(_fixture_dir(args))
    names = list(SECTIONS)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_section, names, [fx] * len(names), [args.seed] * len(names)))
    else:
        results = [_run_section(name, fx, args.seed) for name in names]
    sections = dict(zip(names, results))
    failed = [k for k, v in sections.items() if not v["ok"]]
    verdict = "pass" if not failed else "fail"
    return _report("reproduce-paper", None, verdict, failed=failed, sections=sections), 0 if not failed else 1


# -- entry point -------------------------------------------------------------------


def _jobs_default() -> int:
    raw = os.environ.get("QPCONE_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--budget", type=int, default=5_000_000, help="node budget for searches")
    common.add_argument("--jobs", type=int, default=_jobs_default(), help="worker processes (env QPCONE_JOBS)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")

    parser = argparse.ArgumentParser(prog="qpcone", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", parents=[common], help="decide whether a complex is threshold")
    p.add_argument("complex")
    p.add_argument("--max-k", type=int, default=4)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("shifted", parents=[common], help="decide whether a complex is shifted")
    p.add_argument("complex")
    p.set_defaults(func=cmd_shifted)

    p = sub.add_parser("cancel", parents=[common], help="search for a CC_k or CC_k* violation")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--complex")
    src.add_argument("--order")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_cancel)

    p = sub.add_parser("order-check", parents=[common], help="check axioms and representability of an order")
    p.add_argument("order")
    p.set_defaults(func=cmd_order_check)

    p = sub.add_parser("untie", parents=[common], help="drop hyperplane vectors from a representable order")
    p.add_argument("order")
    p.add_argument("--keep", help="JSON list of ternary vectors to keep")
    p.add_argument("--complete", action="store_true", help="extend --keep to a closed set meeting every +-pair")
    p.set_defaults(func=cmd_untie)

    p = sub.add_parser("example26", parents=[common], help="build or verify the 26-atom construction")
    p.add_argument("action", choices=["build", "verify"])
    p.add_argument("--selector", default="0", help="18-bit hex mask choosing the matrix columns")
    p.add_argument("--in", dest="input", help="construction JSON to verify")
    p.set_defaults(func=cmd_example26)

    p = sub.add_parser("winder", parents=[common], help="test strong acyclicity of a complex")
    p.add_argument("complex")
    p.add_argument("--cycle-witness", action="store_true")
    p.add_argument("--probe", action="store_true", help="try layering the Winder digraph into an order")
    p.set_defaults(func=cmd_winder)

    p = sub.add_parser("reproduce-paper", parents=[common], help="run every worked example end to end")
    p.add_argument("--fixtures", help="directory holding the input fixtures")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        report, code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.timing:
        report["wall_time_s"] = round(time.perf_counter() - start, 3)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
