"""Acceptance suite: one test per criterion, each printing a pass/fail line
with its runtime.  All tolerances are exact (symbolic equality on finite
structures); rank-bounded virtual models are verified up to their bound,
which is the exactness convention those models carry everywhere."""

import copy
import time

import pytest

from conftest import corpus_builtins, corpus_random
from fibcheck import modelfile
from fibcheck.adjunctions import verify_adjunction, verify_weak_adjunction
from fibcheck.cat import check_category_laws, classify_base, iso_search
from fibcheck.completions import (dial_completion, p_sigma, prod_completion,
                                  sum_completion, sum_fibred_coproducts,
                                  sum_fibred_products,
                                  sum_injection_weak_adjoints,
                                  total_weak_coproduct, total_weak_product)
from fibcheck.errors import MissingStructure
from fibcheck.fibration import (check_fibrewise_equivalence, check_split,
                                fibrations_structurally_equal,
                                opposite_fibration)
from fibcheck.models import random_fibration, s0, sub_finset, triv
from fibcheck.qf import (QfAnalysis, classify_fibration,
                         embed_into_recognized, prenex_decompose,
                         recognize_dialectica, reconstruct_from_qf,
                         verify_skolemization)

_CACHE = {}


def corpus():
    if "corpus" not in _CACHE:
        _CACHE["corpus"] = corpus_random(50) + corpus_builtins()
    return _CACHE["corpus"]


def explicit_corpus():
    return [p for p in corpus() if getattr(p.base, "rank_bound", None) is None]


def dial_of(p):
    key = ("dial", id(p))
    if key not in _CACHE:
        _CACHE[key] = dial_completion(p)
    return _CACHE[key]


def classification_of(d):
    key = ("classify", id(d))
    if key not in _CACHE:
        _CACHE[key] = classify_fibration(d)
    return _CACHE[key]


def report_line(n, ok, t0, budget):
    dt = time.time() - t0
    print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} in {dt:.1f}s "
          f"(budget {budget}s)")
    assert ok
    assert dt < budget


def test_criterion_1_dial_decomposition():
    """Dial(p) ≅ Sum(Prod(p)): object/hom bijections commuting with
    reindexing, exactly, on 50 random fibrations plus all builtins."""
    t0 = time.time()
    ok = True
    for p in corpus():
        dr = dial_of(p)
        if not dr.iso_report.ok:
            print("dial iso failed for", p.name, dr.iso_report.violations[:3])
            ok = False
    report_line(1, ok, t0, 60)


def test_criterion_2_duality():
    """Prod(p) ≅ op(Sum(op p)) on the corpus, and (p^op)^op equals p."""
    t0 = time.time()
    ok = True
    for p in corpus():
        pp = prod_completion(p)
        if not pp.duality_report.ok:
            print("duality failed for", p.name, pp.duality_report.violations[:3])
            ok = False
        q = opposite_fibration(opposite_fibration(p))
        if not (q is p and fibrations_structurally_equal(q, p)):
            print("double opposite failed for", p.name)
            ok = False
    report_line(2, ok, t0, 30)


def _qf_characterization(p, bound=None):
    sp = sum_completion(p)
    an = QfAnalysis(sp, bound=bound)
    one = p.ops.terminal()
    for i in an.base_objects():
        fib = sp.fibre(i)
        for x in fib.objects:
            (c, _al) = fib.object_key(x)
            if bound is not None and c > bound:
                continue
            verdict = an.is_qf("sigma", i, x).verdict
            izero = p.ops.product(i, one)[0]
            has_iso = any(
                iso_search(fib, x, fib.id_of_key((one, g))) is not None
                for g in p.fibre(izero).objects)
            if verdict != has_iso:
                return (p.name, i, fib.object_key(x), verdict, has_iso)
    return None


def test_criterion_3_qf_characterization():
    """In Sum(p): sigma-qf(x) iff x ≅ (I,1,gamma), both directions,
    exhaustively over the corpus (up to rank bound on virtual bases)."""
    t0 = time.time()
    ok = True
    for p in corpus():
        bound = getattr(p.base, "rank_bound", None)
        bad = _qf_characterization(p, bound=bound)
        if bad is not None:
            print("qf characterization failed:", bad)
            ok = False
    report_line(3, ok, t0, 120)


def test_criterion_4_free_algebra_round_trip():
    """reconstruct_from_qf(Sum(q), sigma) and (Prod(q), pi) with zero
    defects; recognize_dialectica(Dial(q)) recovers a core fibrewise
    equivalent to q.  Exhaustive on the explicit corpus."""
    t0 = time.time()
    ok = True
    for q in explicit_corpus():
        sp = sum_completion(q)
        _, _, rep = reconstruct_from_qf(sp, "sigma")
        if not rep.ok:
            print("sigma reconstruction failed for", q.name, rep.defects[:3])
            ok = False
        pp = prod_completion(q, compare_duality=False)
        _, _, rep2 = reconstruct_from_qf(pp, "pi")
        if not rep2.ok:
            print("pi reconstruction failed for", q.name, rep2.defects[:3])
            ok = False
        dr = dial_of(q)
        res = recognize_dialectica(dr.fibration,
                                   report=classification_of(dr.fibration))
        if not res.ok:
            print("recognition failed for", q.name)
            ok = False
            continue
        emb = embed_into_recognized(q, res, dr.fibration)
        erep = check_fibrewise_equivalence(emb)
        morph = emb.check()
        if not (erep.ok and morph.ok):
            print("core not equivalent to q for", q.name,
                  erep.defects[:3], morph.violations[:3])
            ok = False
    report_line(4, ok, t0, 180)


def test_criterion_5_goedel_classification_and_prenex():
    """classify(Dial(q)).goedel for every corpus q with cartesian closed
    base; prenex decomposition of every object of every fibre with its iso
    verified."""
    t0 = time.time()
    ok = True
    for q in explicit_corpus():
        base_rep = classify_base(q.base, q.base_structure)
        if not base_rep.cartesian_closed:
            continue
        d = dial_of(q).fibration
        rep = classification_of(d)
        if not rep.goedel:
            print("Dial not goedel for", q.name)
            ok = False
            continue
        for i in d.base.objects:
            for alpha in d.fibre(i).objects:
                res = prenex_decompose(d, i, alpha, report=rep)
                if not all(res.checks.values()):
                    print("prenex failed for", q.name, i, alpha, res.checks)
                    ok = False
    report_line(5, ok, t0, 120)


def test_criterion_6_skolemization():
    """verify_skolemization on every applicable instance of Dial(Triv(C2))
    and Dial(S0), including the Beck-Chevalley pullback of the proof."""
    t0 = time.time()
    ok = True
    n = 0
    for q in (triv("c2"), s0()):
        dq = dial_of(q).fibration
        for a1 in dq.base.objects:
            for a2 in dq.base.objects:
                for b in dq.base.objects:
                    try:
                        fibre_obj = dq.ops.prodn([a1, a2, b])
                    except MissingStructure:
                        continue
                    for alpha in dq.fibre(fibre_obj).objects:
                        rep = verify_skolemization(dq, a1, a2, b, alpha)
                        n += 1
                        if not rep.ok:
                            print("skolemization failed:", q.name,
                                  (a1, a2, b, alpha))
                            ok = False
    assert n >= 60
    report_line(6, ok, t0, 30)


def test_criterion_7_structure_preservation():
    """Sum(sub_finset(2)) at rank bound 2: fibred weak products and
    coproducts, injection weak adjoints with section laws and the one-sided
    unit/counit equalities, and total-category weak products and coproducts
    by exhaustive mediating-arrow existence."""
    t0 = time.time()
    p = sub_finset(2)
    sp = sum_completion(p)
    ok = True

    r1 = sum_fibred_products(sp, bound=2)
    if not r1.ok or not r1.installed:
        print("fibred products failed:", r1.defects[:3])
        ok = False
    r2 = sum_fibred_coproducts(sp, bound=2)
    if not r2.ok or not r2.installed:
        print("fibred coproducts failed:", r2.defects[:3])
        ok = False

    for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        rw, lw = sum_injection_weak_adjoints(sp, a, b)
        ab = p.ops.coproduct(a, b)[0]
        # largest second component whose theta stays materialized
        cap = -1
        for cand in range(3):
            try:
                p.ops.theta_left(a, b, cand)
                cap = cand
            except MissingStructure:
                break
        d_objs = [o for o in sp.fibre(a).objects
                  if sp.fibre(a).object_key(o)[0] <= cap]
        c_objs = [o for o in sp.fibre(ab).objects
                  if sp.fibre(ab).object_key(o)[0] <= cap]
        vr = verify_weak_adjunction(rw, d_objects=d_objs, c_objects=c_objs)
        vl = verify_weak_adjunction(lw, d_objects=c_objs, c_objects=d_objs)
        if not (vr.ok and vl.ok):
            print(f"weak adjoints failed at ({a},{b}):",
                  vr.violations[:2], vl.violations[:2])
            ok = False

    # total-category weak products and coproducts over in-range pairs
    total = None
    pairs = 0
    for i in (0, 1):
        for y in (0, 1):
            for x in sp.fibre(i).objects:
                if sp.fibre(i).object_key(x)[0] > 1:
                    continue
                for z in sp.fibre(y).objects:
                    if sp.fibre(y).object_key(z)[0] > 1:
                        continue
                    res = total_weak_coproduct(sp, (i, x), (y, z), total=total)
                    total = res["total"]
                    if not res["ok"]:
                        print("total weak coproduct failed:", (i, x), (y, z))
                        ok = False
                    resp = total_weak_product(sp, (i, x), (y, z), total=total)
                    if not resp["ok"]:
                        print("total weak product failed:", (i, x), (y, z))
                        ok = False
                    pairs += 1
    assert pairs >= 16
    report_line(7, ok, t0, 300)


def test_criterion_8_retraction_witness():
    """sharp∘flat differs from the identity on a concrete hom-set element of
    the injection weak adjunction on Sum(Sub); the witness replays."""
    t0 = time.time()
    p = sub_finset(2)
    sp = sum_completion(p)
    rw, _ = sum_injection_weak_adjoints(sp, 1, 1)
    witness = None
    d_objs = [o for o in sp.fibre(1).objects
              if sp.fibre(1).object_key(o)[0] <= 2]
    c_objs = [o for o in sp.fibre(2).objects
              if sp.fibre(2).object_key(o)[0] <= 2]
    for d in d_objs:
        for c in c_objs:
            for k in sp.fibre(2).hom(rw.F.ob(d), c):
                if rw.sharp(d, c, rw.flat(d, k)) != k:
                    witness = {"d": sp.fibre(1).object_key(d),
                               "c": sp.fibre(2).object_key(c),
                               "d_id": d, "c_id": c, "element": k}
                    break
            if witness:
                break
        if witness:
            break
    ok = witness is not None
    if ok:
        # replay from the recorded ids
        d, c, k = witness["d_id"], witness["c_id"], witness["element"]
        replay = rw.sharp(d, c, rw.flat(d, k))
        ok = replay != k and rw.flat(d, replay) == rw.flat(d, k)
        print("\nretraction witness:", witness["d"], "->", witness["c"])
    report_line(8, ok, t0, 60)


# ---------------------------------------------------------------------------
# criterion 9: law suites and mutation detection


def _detected(model_doc):
    """A perturbed model counts as detected when parsing, the law suites, or
    the structure/adjunction verification flags it."""
    from fibcheck.errors import MalformedModel
    try:
        m = modelfile.parse_model(copy.deepcopy(model_doc))
    except MalformedModel:
        return True
    from fibcheck.cli import validate_model
    _, bad = validate_model(m)
    if bad:
        return True
    from fibcheck.fibration import IndexedFibration
    if isinstance(m, IndexedFibration):
        rep = classify_base(m.base, m.base_structure)
    else:
        rep = classify_base(m, getattr(m, "structure", None) or
                            __import__("fibcheck.cat", fromlist=["ChosenStructure"]).ChosenStructure())
    for v in (rep.has_terminal, rep.has_initial, rep.has_products,
              rep.has_coproducts, rep.exponentials, rep.has_points):
        if v is not None and not v.ok and v.note == "":
            return True
    if isinstance(m, IndexedFibration):
        for data in list(m.coproduct_pair.values()) + list(m.product_pair.values()):
            if not verify_adjunction(data).ok:
                return True
    return False


def _mutants():
    """Deterministic single-table perturbations across two builtin models."""
    out = []
    base_doc = modelfile.serialize_model(s0())
    from fibcheck.models import chain_doctrine
    doc2 = modelfile.serialize_model(chain_doctrine([1, 2, 2]))
    for doc in (base_doc, doc2):
        arrows = doc["base"]["arrows"]
        up = next(a["id"] for a in arrows if a["dom"] == 0 and a["cod"] == 1)
        id0 = doc["base"]["identity"]["0"]
        id1 = doc["base"]["identity"]["1"]

        m = copy.deepcopy(doc)
        for e in m["base"]["compose"]:
            if e[0] == id0 and e[1] == id0:
                e[2] = up
        out.append(("compose-redirect", m))

        m = copy.deepcopy(doc)
        m["base"]["compose"] = [e for e in m["base"]["compose"]
                                if not (e[0] == id0 and e[1] == id0)]
        out.append(("compose-missing", m))

        m = copy.deepcopy(doc)
        m["base"]["identity"]["0"] = up
        out.append(("identity-redirect", m))

        key = str(up)
        noncst = None
        for rk in sorted(doc["reindex"]):
            vals = set(doc["reindex"][rk]["object_map"].values())
            if len(vals) > 1:
                noncst = rk
                break
        if noncst is not None:
            m = copy.deepcopy(doc)
            m["reindex"][noncst]["object_map"] = {
                k: 0 for k in m["reindex"][noncst]["object_map"]}
            out.append(("reindex-object-redirect", m))

        m = copy.deepcopy(doc)
        amap = m["reindex"][key]["arrow_map"]
        target_fibre = doc["fibres"]["0"]
        ident0 = target_fibre["identity"]["0"]
        changed = False
        for k in sorted(amap):
            if amap[k] != ident0:
                m["reindex"][key]["arrow_map"][k] = ident0
                changed = True
                break
        if not changed:
            fib1 = doc["fibres"]["1"]
            m2 = copy.deepcopy(doc)
            m2["fibres"]["1"]["identity"]["0"] = \
                [a["id"] for a in fib1["arrows"] if a["dom"] != a["cod"]][0]
            m = m2
        out.append(("reindex-arrow-redirect", m))

        m = copy.deepcopy(doc)
        prods = m["base"]["structure"]["products"]
        entry = next(e for e in prods if e[0] == 1 and e[1] == 1)
        entry[3] = up if entry[3] != up else id1
        out.append(("product-projection-redirect", m))

        m = copy.deepcopy(doc)
        m["base"]["structure"]["terminal"]["maps"]["0"] = id0
        out.append(("terminal-map-redirect", m))

        m = copy.deepcopy(doc)
        cops = m["base"]["structure"]["coproducts"]
        entry = next(e for e in cops if e[0] == 0 and e[1] == 0)
        entry[3] = up
        out.append(("coproduct-injection-redirect", m))

        m = copy.deepcopy(doc)
        exps = m["base"]["structure"].get("exponentials", [])
        if exps:
            exps[-1][3] = id0 if exps[-1][3] != id0 else id1
            out.append(("exponential-ev-redirect", m))

        m = copy.deepcopy(doc)
        fib1 = m["fibres"]["1"]
        nonid = [a["id"] for a in fib1["arrows"] if a["dom"] != a["cod"]]
        if nonid:
            fib1["identity"]["0"] = nonid[0]
            out.append(("fibre-identity-redirect", m))

        sp_doc = modelfile.serialize_model(sum_completion(modelfile.parse_model(
            copy.deepcopy(doc))))
        m = copy.deepcopy(sp_doc)
        q = m["quantifiers"]["coproducts"][0]
        keys = sorted(q["unit"])
        k0 = keys[0]
        other = [v for v in q["unit"].values() if v != q["unit"][k0]]
        fibre_doc = m["fibres"][str(next(
            e[2] for e in m["base"]["structure"]["products"]
            if [e[0], e[1]] == q["pair"]))]
        wrong = next(a["id"] for a in fibre_doc["arrows"]
                     if a["id"] != q["unit"][k0] and a["dom"] == a["cod"]
                     and str(a["dom"]) != k0)
        q["unit"][k0] = wrong
        out.append(("quantifier-unit-redirect", m))
    return out


def test_criterion_9_law_suites_and_mutation():
    """Builtins and 200 random models pass the law suites; every injected
    single-table perturbation (>= 20 mutants) is detected."""
    t0 = time.time()
    ok = True
    for p in corpus_builtins():
        bound = getattr(p.base, "rank_bound", None)
        if not check_category_laws(p.base, bound=bound).ok or \
                not check_split(p, bound=bound).ok:
            print("law suite failed for builtin", p.name)
            ok = False
    for seed in range(200):
        p = random_fibration(seed, 1 + seed % 3, 1 + seed % 4,
                             allow_nonthin=(seed % 9 == 4))
        if not check_category_laws(p.base).ok or not check_split(p).ok:
            print("law suite failed for random", seed)
            ok = False
        if seed % 20 == 0:
            from fibcheck.adjunctions import find_adjoint
            for (j, k), (_prod, pj, _pk) in p.ops.st.products.items():
                data = find_adjoint(p, p.reindex_along(pj), "left")
                if data is not None and not verify_adjunction(data).ok:
                    print("found adjoint fails verification", seed, (j, k))
                    ok = False
    mutants = _mutants()
    assert len(mutants) >= 20
    undetected = [name for name, doc in mutants if not _detected(doc)]
    if undetected:
        print("undetected mutants:", undetected)
        ok = False
    print(f"\nmutants: {len(mutants)} generated, "
          f"{len(mutants) - len(undetected)} detected")
    report_line(9, ok, t0, 120)
