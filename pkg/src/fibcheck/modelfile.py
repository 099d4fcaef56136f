"""The fibcheck/1 JSON model format: categories and indexed fibrations with
chosen structure, deterministic (sorted keys, canonical list orders) and
round-trip stable."""

from __future__ import annotations

import json

from .cat import (ChosenStructure, FinCategory, Functor, LazyCategory,
                  OpCategory)
from .errors import MalformedModel, MissingStructure, SizeExceeded
from .fibration import IndexedFibration

SCHEMA = "fibcheck/1"
MAX_SERIALIZED_ARROWS = 20000


# ---------------------------------------------------------------------------
# serialization


def _cat_tables(cat):
    """Explicit tables for any protocol category; returns
    (n_objects, arrows, identity, compose, arrow_index)."""
    if isinstance(cat, FinCategory):
        index = {f: f for f in cat.all_arrows()}
        arrows = [(f, cat.dom(f), cat.cod(f)) for f in cat.all_arrows()]
        identity = {a: cat.identity(a) for a in cat.objects}
        compose = sorted((g, f, h) for (g, f), h in cat._compose.items())
        return cat.n_objects, arrows, identity, compose, index
    arrows = []
    index = {}
    for a in cat.objects:
        for b in cat.objects:
            for f in cat.hom(a, b):
                index[f] = len(arrows)
                arrows.append((len(arrows), a, b))
                if len(arrows) > MAX_SERIALIZED_ARROWS:
                    raise SizeExceeded(
                        f"category too large to serialize (> {MAX_SERIALIZED_ARROWS} arrows)")
    identity = {a: index[cat.identity(a)] for a in cat.objects}
    compose = []
    flat = list(index.keys())
    for f in flat:
        for g in flat:
            if cat.dom(g) == cat.cod(f):
                compose.append((index[g], index[f], index[cat.compose(g, f)]))
    compose.sort()
    return cat.n_objects, arrows, identity, compose, index


def _structure_json(st: ChosenStructure, index):
    if st is None:
        return None
    out = {}
    if st.terminal is not None:
        out["terminal"] = {"object": st.terminal,
                           "maps": {str(a): index[f] for a, f in
                                    sorted(st.terminal_maps.items())}}
    if st.initial is not None:
        out["initial"] = {"object": st.initial,
                          "maps": {str(a): index[f] for a, f in
                                   sorted(st.initial_maps.items())}}
    prods = []
    for (a, b), (p, pa, pb) in sorted(st.products.items()):
        prods.append([a, b, p, index[pa], index[pb]])
    if prods:
        out["products"] = prods
    cops = []
    for (a, b), (c, ja, jb) in sorted(st.coproducts.items()):
        cops.append([a, b, c, index[ja], index[jb]])
    if cops:
        out["coproducts"] = cops
    exps = []
    for (a, b), (e, ev) in sorted(st.exponentials.items()):
        exps.append([a, b, e, index[ev]])
    if exps:
        out["exponentials"] = exps
    if st.points:
        out["points"] = {str(a): index[f] for a, f in sorted(st.points.items())}
    if st.weak_products:
        out["weak_products"] = sorted(list(x) for x in st.weak_products)
    if st.weak_coproducts:
        out["weak_coproducts"] = sorted(list(x) for x in st.weak_coproducts)
    if st.partial_ok:
        out["partial_ok"] = True
    return out


def _cat_json(cat, structure=None):
    n, arrows, identity, compose, index = _cat_tables(cat)
    out = {
        "objects": n,
        "arrows": [{"id": i, "dom": d, "cod": c} for (i, d, c) in
                   ((index[f] if not isinstance(f, int) else f, d, c)
                    for (f, d, c) in arrows)],
        "identity": {str(a): identity[a] for a in sorted(identity)},
        "compose": [list(x) for x in compose],
    }
    st = _structure_json(structure, index)
    if st:
        out["structure"] = st
    return out, index


def serialize_model(model, name=None) -> dict:
    """JSON document for a FinCategory or an IndexedFibration."""
    if isinstance(model, (FinCategory, LazyCategory, OpCategory)):
        body, _ = _cat_json(model, getattr(model, "structure", None))
        return {"schema": SCHEMA,
                "meta": {"name": name or getattr(model, "name", ""),
                         "rank_bound": getattr(model, "rank_bound", None)},
                "base": body}
    p = model
    base_json, base_index = _cat_json(p.base, p.base_structure)
    fibres = {}
    fibre_indices = {}
    for a in p.base.objects:
        body, idx = _cat_json(p.fibre(a), p.fibre_structure(a))
        fibres[str(a)] = body
        fibre_indices[a] = idx
    reindex = {}
    for a in p.base.objects:
        for b in p.base.objects:
            for u in p.base.hom(a, b):
                F = p.reindex_along(u)
                src_idx = fibre_indices[b]
                tgt_idx = fibre_indices[a]
                ob_map = {}
                ar_map = {}
                fib_b = p.fibre(b)
                for x in fib_b.objects:
                    ob_map[str(x)] = F.ob(x)
                for y in fib_b.objects:
                    for z in fib_b.objects:
                        for h in fib_b.hom(y, z):
                            ar_map[str(src_idx[h])] = tgt_idx[F.ar(h)]
                reindex[str(base_index[u])] = {"object_map": ob_map,
                                               "arrow_map": ar_map}
    doc = {"schema": SCHEMA,
           "meta": {"name": name or p.name,
                    "rank_bound": getattr(p.base, "rank_bound", None)},
           "base": base_json,
           "fibres": fibres,
           "reindex": reindex}
    quant = _quantifiers_json(p, fibre_indices)
    if quant:
        doc["quantifiers"] = quant
    return doc


def _adjunction_json(p, jk, data, side, fibre_indices):
    """Tables for the non-reindexing functor of a simple-quantifier
    adjunction, with unit and counit components."""
    j, k = jk
    prod = p.ops.product(j, k)[0]
    F = data.left if side == "coproduct" else data.right
    src_fibre = prod if side == "coproduct" else prod
    # coproduct: L: fibre(J×K) -> fibre(J); product: R: fibre(J×K) -> fibre(J)
    src_cat = p.fibre(prod)
    tgt_idx = fibre_indices[j]
    src_idx = fibre_indices[prod]
    ob = {str(x): F.ob(x) for x in src_cat.objects}
    ar = {}
    for a in src_cat.objects:
        for b in src_cat.objects:
            for h in src_cat.hom(a, b):
                ar[str(src_idx[h])] = tgt_idx[F.ar(h)]
    if side == "coproduct":
        unit = {str(x): src_idx[data.unit[x]] for x in src_cat.objects}
        counit = {str(c): tgt_idx[data.counit[c]] for c in p.fibre(j).objects}
    else:
        unit = {str(c): tgt_idx[data.unit[c]] for c in p.fibre(j).objects}
        counit = {str(x): src_idx[data.counit[x]] for x in src_cat.objects}
    return {"pair": [j, k], "ob": ob, "ar": ar, "unit": unit, "counit": counit}


def _quantifiers_json(p, fibre_indices):
    out = {}
    cops = []
    for jk, data in sorted(k for k in p.coproduct_pair.items()
                           if isinstance(k[0], tuple) and len(k[0]) == 2
                           and all(isinstance(x, int) for x in k[0])):
        try:
            cops.append(_adjunction_json(p, jk, data, "coproduct", fibre_indices))
        except (KeyError, SizeExceeded, MissingStructure):
            continue
    if cops:
        out["coproducts"] = cops
    prods = []
    for jk, data in sorted(k for k in p.product_pair.items()
                           if isinstance(k[0], tuple) and len(k[0]) == 2
                           and all(isinstance(x, int) for x in k[0])):
        try:
            prods.append(_adjunction_json(p, jk, data, "product", fibre_indices))
        except (KeyError, SizeExceeded, MissingStructure):
            continue
    if prods:
        out["products"] = prods
    return out


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# parsing


def _parse_structure(raw, n_arrows):
    if not raw:
        return ChosenStructure()
    st = ChosenStructure()

    def arrow(x, where):
        x = int(x)
        if not (0 <= x < n_arrows):
            raise MalformedModel(f"{where} references unknown arrow id {x}")
        return x

    if "terminal" in raw:
        st.terminal = int(raw["terminal"]["object"])
        st.terminal_maps = {int(a): arrow(f, "terminal map")
                            for a, f in raw["terminal"].get("maps", {}).items()}
    if "initial" in raw:
        st.initial = int(raw["initial"]["object"])
        st.initial_maps = {int(a): arrow(f, "initial map")
                           for a, f in raw["initial"].get("maps", {}).items()}
    for a, b, p, pa, pb in raw.get("products", ()):
        st.products[(int(a), int(b))] = (int(p), arrow(pa, "product"),
                                         arrow(pb, "product"))
    for a, b, c, ja, jb in raw.get("coproducts", ()):
        st.coproducts[(int(a), int(b))] = (int(c), arrow(ja, "coproduct"),
                                           arrow(jb, "coproduct"))
    for a, b, e, ev in raw.get("exponentials", ()):
        st.exponentials[(int(a), int(b))] = (int(e), arrow(ev, "exponential"))
    for a, f in raw.get("points", {}).items():
        st.points[int(a)] = arrow(f, "point")
    for pair in raw.get("weak_products", ()):
        st.weak_products.add(tuple(pair))
    for pair in raw.get("weak_coproducts", ()):
        st.weak_coproducts.add(tuple(pair))
    st.partial_ok = bool(raw.get("partial_ok", False))
    return st


def _parse_cat(raw, name="", rank_bound=None):
    try:
        n = int(raw["objects"])
        arrows = raw["arrows"]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedModel(f"bad category body: {e}") from None
    n_arr = len(arrows)
    dom = [0] * n_arr
    cod = [0] * n_arr
    seen = set()
    for entry in arrows:
        i = int(entry["id"])
        if i in seen or not (0 <= i < n_arr):
            raise MalformedModel(f"arrow ids must be dense; bad id {i}")
        seen.add(i)
        d, c = int(entry["dom"]), int(entry["cod"])
        if not (0 <= d < n) or not (0 <= c < n):
            raise MalformedModel(f"arrow {i} references unknown object {d if d >= n else c}")
        dom[i], cod[i] = d, c
    identity = [0] * n
    got = raw.get("identity", {})
    if len(got) != n:
        raise MalformedModel("identity table must cover every object")
    for a, f in got.items():
        a, f = int(a), int(f)
        if not (0 <= a < n):
            raise MalformedModel(f"identity table references unknown object {a}")
        if not (0 <= f < n_arr):
            raise MalformedModel(f"identity of object {a} is unknown arrow {f}")
        identity[a] = f
    compose = {}
    for g, f, h in raw.get("compose", ()):
        for x in (g, f, h):
            if not (0 <= int(x) < n_arr):
                raise MalformedModel(f"compose entry [{g},{f},{h}] references unknown arrow {x}")
        compose[(int(g), int(f))] = int(h)
    cat = FinCategory(n, dom, cod, identity, compose, name=name,
                      rank_bound=rank_bound)
    structure = _parse_structure(raw.get("structure"), n_arr)
    return cat, structure


def parse_model(doc):
    """Model (dict or JSON string) -> FinCategory (with .structure) or
    IndexedFibration.  Structural defects raise MalformedModel naming the
    first offending id."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("schema") != SCHEMA:
        raise MalformedModel(f"unknown schema {doc.get('schema')!r}; expected {SCHEMA}")
    meta = doc.get("meta", {})
    base, base_st = _parse_cat(doc["base"], name=meta.get("name", ""),
                               rank_bound=meta.get("rank_bound"))
    if "fibres" not in doc:
        base.structure = base_st
        return base
    fibres = {}
    fibre_st = {}
    for a_str, raw in doc["fibres"].items():
        a = int(a_str)
        if not (0 <= a < base.n_objects):
            raise MalformedModel(f"fibre listed for unknown base object {a}")
        fibres[a], fibre_st[a] = _parse_cat(raw, name=f"fibre{a}")
    missing = [a for a in base.objects if a not in fibres]
    if missing:
        raise MalformedModel(f"missing fibre for base object {missing[0]}")
    reindex_raw = doc.get("reindex", {})
    functors = {}
    for u_str, body in reindex_raw.items():
        u = int(u_str)
        if not (0 <= u < base.n_arrows):
            raise MalformedModel(f"reindex listed for unknown base arrow {u}")
        a, b = base.dom(u), base.cod(u)
        src, tgt = fibres[b], fibres[a]
        ob_map = {}
        for x, y in body.get("object_map", {}).items():
            x, y = int(x), int(y)
            if not (0 <= x < src.n_objects):
                raise MalformedModel(f"reindex {u}: unknown source object {x}")
            if not (0 <= y < tgt.n_objects):
                raise MalformedModel(f"reindex {u}: unknown target object {y}")
            ob_map[x] = y
        ar_map = {}
        for f, g in body.get("arrow_map", {}).items():
            f, g = int(f), int(g)
            if not (0 <= f < src.n_arrows):
                raise MalformedModel(f"reindex {u}: unknown source arrow {f}")
            if not (0 <= g < tgt.n_arrows):
                raise MalformedModel(f"reindex {u}: unknown target arrow {g}")
            ar_map[f] = g
        for x in src.objects:
            if x not in ob_map:
                raise MalformedModel(f"reindex {u}: object_map misses object {x}")
        for f in src.all_arrows():
            if f not in ar_map:
                raise MalformedModel(f"reindex {u}: arrow_map misses arrow {f}")
        functors[u] = Functor.from_tables(src, tgt, ob_map, ar_map,
                                          name=f"reindex{u}")
    for u in base.all_arrows():
        if u not in functors:
            raise MalformedModel(f"missing reindex functor for base arrow {u}")
    p = IndexedFibration(base, base_st, fibres, reindex=functors,
                         fibre_structures=fibre_st,
                         name=meta.get("name", ""),
                         partial=bool(meta.get("rank_bound") is not None))
    _parse_quantifiers(p, doc.get("quantifiers", {}))
    return p


def _parse_quantifiers(p, raw):
    from .adjunctions import AdjunctionData
    for side in ("coproducts", "products"):
        for entry in raw.get(side, ()):
            j, k = (int(x) for x in entry["pair"])
            if p.ops.try_product(j, k) is None:
                raise MalformedModel(
                    f"quantifier data for pair ({j},{k}) without a chosen product")
            prod, pj, _ = p.ops.product(j, k)
            weakening = p.reindex_along(pj)
            ob_map = {int(a): int(b) for a, b in entry["ob"].items()}
            ar_map = {int(a): int(b) for a, b in entry["ar"].items()}
            F = Functor(p.fibre(prod), p.fibre(j),
                        lambda x, m=ob_map: m[x],
                        lambda h, m=ar_map: m[h],
                        name=f"{side}({j},{k})")
            if side == "coproducts":
                unit = {int(a): int(f) for a, f in entry["unit"].items()}
                counit = {int(a): int(f) for a, f in entry["counit"].items()}
                data = AdjunctionData(F, weakening, unit, counit,
                                      name=f"sigma({j};{k})")
                p.coproduct_pair[(j, k)] = data
                p.coproduct_along.setdefault(pj, data)
            else:
                unit = {int(a): int(f) for a, f in entry["unit"].items()}
                counit = {int(a): int(f) for a, f in entry["counit"].items()}
                data = AdjunctionData(weakening, F, unit, counit,
                                      name=f"pi({j};{k})")
                p.product_pair[(j, k)] = data
                p.product_along.setdefault(pj, data)
