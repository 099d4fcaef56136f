"""Command-line interface: load fibration models (files or builtin recipes),
run completions / classification / recognition, and emit deterministic
machine-readable reports.

Exit codes: 0 all verdicts delivered and internally consistent, 1 a checked
property failed, 2 malformed input (schema or law failure).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from urllib.parse import parse_qs, urlparse

from . import modelfile
from .cat import FinCategory, check_category_laws, classify_base, ChosenStructure
from .completions import (dial_completion, prod_completion, sum_completion,
                          sum_fibred_coproducts, sum_fibred_products,
                          sum_injection_weak_adjoints)
from .adjunctions import (BCCSquare, bcc_compare, find_adjoint,
                          verify_adjunction, verify_weak_adjunction)
from .errors import FibcheckError, MalformedModel, MissingStructure
from .fibration import IndexedFibration, check_split, fibre_structure_report
from .models import builtin_fibration, random_fibration
from .qf import (QfAnalysis, classify_fibration, prenex_decompose,
                 recognize_dialectica, reconstruct_from_qf,
                 verify_skolemization)


def load_model(spec, *, seed=None):
    """builtin:name?k=v or a JSON model file path."""
    if spec.startswith("builtin:"):
        rest = spec[len("builtin:"):]
        url = urlparse("x://x/?" + rest.split("?", 1)[1]) if "?" in rest \
            else None
        name = rest.split("?", 1)[0]
        params = {}
        if url is not None:
            params = {k: v[0] for k, v in parse_qs(url.query).items()}
        if name == "random":
            return random_fibration(
                int(params.get("seed", seed if seed is not None else 0)),
                int(params.get("base", 2)), int(params.get("fibre", 2)),
                allow_nonthin=params.get("nonthin", "0") not in ("0", "false"))
        return builtin_fibration(name, params)
    with open(spec, "r", encoding="utf-8") as fh:
        return modelfile.parse_model(fh.read())


def validate_model(model, bound=None):
    """Law and split checks run on every loaded model; the first violated
    equation aborts the command (exit 2)."""
    reports = {}
    if isinstance(model, IndexedFibration):
        reports["base_laws"] = check_category_laws(model.base, bound=bound)
        if reports["base_laws"].ok:
            for a in model.base.objects:
                if bound is not None and a > bound:
                    continue
                rep = check_category_laws(model.fibre(a), bound=None)
                if not rep.ok:
                    reports[f"fibre_{a}_laws"] = rep
                    break
            reports["split"] = check_split(model, bound=bound)
    else:
        reports["laws"] = check_category_laws(model, bound=bound)
    bad = {k: r for k, r in reports.items() if not r.ok}
    return reports, bad


# ---------------------------------------------------------------------------
# suites


def _suite_laws(model, bound, mode):
    out = {}
    reports, bad = validate_model(model, bound=bound)
    out["laws"] = {k: r.to_json() for k, r in reports.items()}
    if isinstance(model, IndexedFibration):
        out["base_structure"] = classify_base(model.base, model.base_structure,
                                              bound=bound).to_json()
    elif getattr(model, "structure", None) is not None:
        out["base_structure"] = classify_base(model, model.structure,
                                              bound=bound).to_json()
    ok = not bad
    return out, ok


def _projection_squares(p, bound, side):
    """Standard Beck-Chevalley squares between weakenings: the pullback of a
    projection along f × id."""
    from .completions import p_sigma, p_pi
    base, ops = p.base, p.ops
    objs = [a for a in base.objects if bound is None or a <= bound]
    squares = []
    for x in objs:
        for i in objs:
            for j in objs:
                if ops.try_product(i, x) is None or ops.try_product(j, x) is None:
                    continue
                for f in base.hom(i, j):
                    try:
                        adj_top = p_sigma(p, i, x) if side == "left" else p_pi(p, i, x)
                        adj_bot = p_sigma(p, j, x) if side == "left" else p_pi(p, j, x)
                    except MissingStructure:
                        continue
                    _, pi_i, pi_x = ops.product(i, x)
                    _, pj_j, pj_x = ops.product(j, x)
                    left = ops.pair(base.compose(f, pi_i), pi_x, j, x)
                    squares.append(BCCSquare(top=pi_i, bot=pj_j, left=left,
                                             right=f, adj_top=adj_top,
                                             adj_bot=adj_bot))
    return squares


def _suite_adjunctions(model, bound, mode):
    if not isinstance(model, IndexedFibration):
        return {"note": "adjunction suite needs a fibration"}, True
    p = model
    out = {"simple": {}, "bcc": []}
    ok = True
    objs = [a for a in p.base.objects if bound is None or a <= bound]
    from .completions import p_sigma, p_pi
    for a in objs:
        for b in objs:
            if p.ops.try_product(a, b) is None:
                continue
            entry = {}
            for side, fetch in (("coproduct", p_sigma), ("product", p_pi)):
                try:
                    data = fetch(p, a, b)
                    rep = verify_adjunction(data)
                    entry[side] = {"found": True, "ok": rep.ok,
                                   "violations": rep.violations[:5]}
                    ok = ok and rep.ok
                except MissingStructure:
                    entry[side] = {"found": False}
            out["simple"][f"({a},{b})"] = entry
    for side in ("left", "right"):
        for sq in _projection_squares(p, bound, side):
            from .adjunctions import check_pullback
            if not check_pullback(p.base, sq):
                continue
            bad = bcc_compare(p, sq, side=side, mode=mode)
            out["bcc"].append({"side": side, "ok": bad is None,
                               "detail": bad})
            ok = ok and bad is None
    return out, ok


def _suite_completions(model, bound, mode):
    if not isinstance(model, IndexedFibration):
        return {"note": "completion suite needs a fibration"}, True
    p = model
    out = {}
    ok = True
    try:
        sp = sum_completion(p)
        out["sum_split"] = check_split(sp, bound=bound).to_json()
        ok = ok and check_split(sp, bound=bound).ok
    except MissingStructure as e:
        return {"note": f"no completions: {e}"}, True
    pp = prod_completion(p)
    dual = getattr(pp, "duality_report", None)
    if dual is not None:
        out["prod_duality"] = dual.to_json()
        ok = ok and dual.ok
    dial = dial_completion(p)
    out["dial_iso"] = dial.iso_report.to_json()
    ok = ok and dial.iso_report.ok
    out["cardinalities"] = {
        str(i): {"sum": sp.fibre(i).n_objects, "prod": pp.fibre(i).n_objects,
                 "dial": dial.fibration.fibre(i).n_objects}
        for i in p.base.objects if bound is None or i <= bound}
    return out, ok


def _suite_recognition(model, bound, mode):
    if not isinstance(model, IndexedFibration):
        return {"note": "recognition suite needs a fibration"}, True
    p = model
    out = {}
    ok = True
    rep = classify_fibration(p, bound=bound)
    out["classification"] = rep.to_json()
    if rep.enough_sigma_qf and rep.enough_sigma_qf.verdict:
        try:
            _, _, eq = reconstruct_from_qf(p, "sigma", bound=bound,
                                           analysis=rep.analysis)
            out["reconstruct_sigma"] = eq.to_json()
            ok = ok and eq.ok
        except FibcheckError as e:
            out["reconstruct_sigma"] = {"error": str(e)}
            ok = False
    res = recognize_dialectica(p, bound=bound, report=rep)
    out["recognize"] = res.to_json()
    if rep.goedel:
        ok = ok and res.ok
    return out, ok


SUITES = {"laws": _suite_laws, "adjunctions": _suite_adjunctions,
          "completions": _suite_completions, "recognition": _suite_recognition}


# ---------------------------------------------------------------------------
# commands


def _check_fibre_object(model, i, alpha):
    if not isinstance(model, IndexedFibration):
        raise MalformedModel("this command needs a fibration model")
    if i not in model.base.objects:
        raise MalformedModel(f"unknown base object {i}")
    if alpha not in model.fibre(i).objects:
        raise MalformedModel(f"unknown object {alpha} in the fibre over {i}")


def run_command(cmd, model, flags):
    """Execute one command against a loaded model; returns (report, exit)."""
    bound = flags.get("bound")
    mode = flags.get("mode", "strict")
    report = {"command": cmd, "flags": {k: v for k, v in sorted(flags.items())
                                        if v is not None}}
    t0 = time.time()
    code = 0

    if cmd == "classify":
        rep = classify_fibration(model, bound=bound)
        report["verdicts"] = rep.to_json()
        report["ok"] = True
    elif cmd == "complete":
        op = flags.get("op", "dial")
        if op == "sum":
            result = sum_completion(model)
        elif op == "prod":
            result = prod_completion(model)
        elif op == "dial":
            dial = dial_completion(model)
            result = dial.fibration
            report["dial_iso_ok"] = dial.iso_report.ok
            if not dial.iso_report.ok:
                code = 1
        else:
            raise MalformedModel(f"unknown completion op {op!r}")
        report["fibre_sizes"] = {str(i): result.fibre(i).n_objects
                                 for i in result.base.objects}
        out_path = flags.get("out")
        if out_path:
            doc = modelfile.serialize_model(result)
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(modelfile.dumps(doc))
            report["out"] = out_path
        report["ok"] = code == 0
    elif cmd == "recognize":
        res = recognize_dialectica(model, bound=bound)
        report["recognized"] = res.ok
        report["report"] = res.to_json()
        if res.blocked_by is None and not res.ok:
            code = 1
        report["ok"] = code == 0
    elif cmd == "prenex":
        if not flags.get("object"):
            raise MalformedModel("prenex needs --object I,ALPHA")
        i, alpha = (int(x) for x in flags["object"].split(","))
        _check_fibre_object(model, i, alpha)
        res = prenex_decompose(model, i, alpha, bound=bound)
        report["decomposition"] = res.to_json()
        if not all(res.checks.values()):
            code = 1
        report["ok"] = code == 0
    elif cmd == "skolemize":
        if not flags.get("instance"):
            raise MalformedModel("skolemize needs --instance A1,A2,B,ALPHA")
        a1, a2, b, alpha = (int(x) for x in flags["instance"].split(","))
        for obj in (a1, a2, b):
            if obj not in model.base.objects:
                raise MalformedModel(f"unknown base object {obj}")
        fibre_obj = model.ops.prodn([a1, a2, b])
        _check_fibre_object(model, fibre_obj, alpha)
        res = verify_skolemization(model, a1, a2, b, alpha)
        report["skolemization"] = res.to_json()
        if not res.ok:
            code = 1
        report["ok"] = code == 0
    elif cmd == "verify":
        which = flags.get("suite", "all")
        names = list(SUITES) if which == "all" else [which]
        results = {}
        all_ok = True
        for nm in names:
            body, ok = SUITES[nm](model, bound, mode)
            results[nm] = {"ok": ok, **body}
            all_ok = all_ok and ok
        report["suites"] = results
        report["ok"] = all_ok
        if not all_ok:
            code = 1
    else:
        raise MalformedModel(f"unknown command {cmd!r}")
    report["bound"] = bound
    report["timing_ms"] = int((time.time() - t0) * 1000)
    return report, code


def format_report(report, fmt="json"):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=1, default=str) + "\n"
    lines = []

    def walk(prefix, value):
        if isinstance(value, dict):
            for k in sorted(value):
                walk(f"{prefix}.{k}" if prefix else str(k), value[k])
        elif isinstance(value, (list, tuple)):
            lines.append(f"{prefix}: {value!r}")
        else:
            lines.append(f"{prefix}: {value}")

    walk("", report)
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fibcheck",
        description="finite split fibrations: completions, classification, "
                    "recognition")
    ap.add_argument("command", choices=["classify", "complete", "recognize",
                                        "prenex", "skolemize", "verify"])
    ap.add_argument("model", help="model file path or builtin:name?params")
    ap.add_argument("--op", choices=["sum", "prod", "dial"], default="dial")
    ap.add_argument("--suite", choices=["laws", "adjunctions", "completions",
                                        "recognition", "all"], default="all")
    ap.add_argument("--object", help="I,ALPHA ids for prenex")
    ap.add_argument("--instance", help="A1,A2,B,ALPHA ids for skolemize")
    ap.add_argument("--bound", type=int, default=None)
    ap.add_argument("--mode", choices=["strict", "iso"], default="strict")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=["json", "text"], default="json")
    args = ap.parse_args(argv)
    flags = {"op": args.op, "suite": args.suite, "object": args.object,
             "instance": args.instance, "bound": args.bound,
             "mode": args.mode, "out": args.out, "seed": args.seed}
    try:
        model = load_model(args.model, seed=args.seed)
    except FileNotFoundError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except FibcheckError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except json.JSONDecodeError as e:
        sys.stderr.write(f"error: invalid JSON: {e}\n")
        return 2
    bound = args.bound
    _, bad = validate_model(model, bound=bound)
    if bad:
        doc = {"error": "model fails the law suite",
               "reports": {k: r.to_json() for k, r in bad.items()}}
        sys.stdout.write(format_report(doc, args.format))
        return 2
    try:
        report, code = run_command(args.command, model, flags)
    except FibcheckError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    sys.stdout.write(format_report(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
