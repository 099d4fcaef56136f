"""Strict split fibrations in indexed form, their total categories,
cartesian lifts, opposites, and fibred/total product structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cat import (LArr, LawReport, ChosenStructure, Functor, LazyCategory,
                  StructOps, check_functor, functors_equal, full_subcategory,
                  op_functor, opposite, _arr_json)
from .errors import MalformedModel, MissingStructure, SplitViolation


class IndexedFibration:
    """A split fibration presented as base + fibre-per-object +
    reindexing-functor-per-arrow.

    ``reindex`` maps a base arrow u: A -> B to a functor fibre(B) -> fibre(A);
    splitness means reindex(id) = id and reindex(v∘u) = reindex(u)∘reindex(v)
    on the nose.  Optional simple-quantifier and injection-adjoint data is
    attached by the completion builders (and consumed by classification);
    everything is immutable after construction in practice.
    """

    def __init__(self, base, base_structure, fibres, reindex=None, *,
                 reindex_fn=None, fibre_structures=None, name="", partial=False):
        self.base = base
        self.base_structure = base_structure
        self.ops = StructOps(base, base_structure)
        self.fibres = dict(fibres)
        self._reindex = dict(reindex or {})
        self._reindex_fn = reindex_fn
        self.fibre_structures = dict(fibre_structures or {})
        self.name = name
        self.partial = partial
        # quantifier attachments: by base arrow for generic consumers, and
        # by product pair for the completion formulas (several pairs can
        # share one projection arrow, e.g. in chains)
        self.coproduct_along = {}        # u -> AdjunctionData for ∐_u ⊣ u*
        self.product_along = {}          # u -> AdjunctionData for u* ⊣ ∏_u
        self.coproduct_pair = {}         # (j, k) -> AdjunctionData
        self.product_pair = {}           # (j, k) -> AdjunctionData
        self.weak_coproduct_along = {}   # j -> WeakAdjunctionData (right-weak)
        self.weak_product_along = {}     # j -> WeakAdjunctionData (left-weak)

    def fibre(self, a):
        return self.fibres[a]

    def fibre_structure(self, a) -> Optional[ChosenStructure]:
        return self.fibre_structures.get(a)

    def reindex_along(self, u) -> Functor:
        got = self._reindex.get(u)
        if got is None:
            if self._reindex_fn is None:
                raise MalformedModel(f"no reindexing functor for base arrow {u!r}")
            got = self._reindex_fn(u)
            self._reindex[u] = got
        return got

    def star(self, u, x):
        """u*(x) on objects."""
        return self.reindex_along(u).ob(x)

    def star_ar(self, u, h):
        """u*(h) on vertical arrows."""
        return self.reindex_along(u).ar(h)

    def __repr__(self):
        return f"IndexedFibration({self.name or 'anon'} over {getattr(self.base, 'name', '?')})"


def check_split(p: IndexedFibration, bound=None) -> LawReport:
    """List every violation of reindex(id)=id and
    reindex(v∘u) = reindex(u)∘reindex(v), plus functor-law violations of the
    reindexing functors themselves."""
    if bound is None:
        bound = getattr(p.base, "rank_bound", None)
    base = p.base
    rep = LawReport()
    objs = [a for a in base.objects if bound is None or a <= bound]
    rep.bounded = len(objs) < base.n_objects
    for a in objs:
        ida = base.identity(a)
        F = p.reindex_along(ida)
        if not functors_equal(F, Functor.identity_functor(p.fibre(a)), bound=None):
            rep.violations.append({"kind": "reindex-identity", "object": a})
    for a in objs:
        for b in objs:
            for u in base.hom(a, b):
                F = p.reindex_along(u)
                for v in check_functor(F):
                    rep.violations.append({"kind": "reindex-functor-law",
                                           "arrow": _arr_json(u), **v})
                for c in objs:
                    for v in base.hom(b, c):
                        vu = base.compose(v, u)
                        lhs = p.reindex_along(vu)
                        Fv = p.reindex_along(v)
                        composed = Functor(p.fibre(c), p.fibre(a),
                                           lambda x, F=F, Fv=Fv: F.ob(Fv.ob(x)),
                                           lambda h, F=F, Fv=Fv: F.ar(Fv.ar(h)))
                        try:
                            equal = functors_equal(lhs, composed)
                        except (KeyError, MalformedModel):
                            equal = False
                        if not equal:
                            rep.violations.append({
                                "kind": "reindex-composition",
                                "pair": [_arr_json(v), _arr_json(u)]})
    rep.checked = {"objects": len(objs)}
    return rep


# ---------------------------------------------------------------------------
# total category


class TotalCategory(LazyCategory):
    """Grothendieck total category of an indexed fibration.

    Objects are pairs (base object, fibre object); an arrow over u: A -> B is
    a payload (u, h) with h: X -> u*(Y) vertical in fibre(A).
    """

    def __init__(self, p: IndexedFibration):
        self.p = p
        keys = [(a, x) for a in p.base.objects for x in p.fibre(a).objects]

        def hom_fn(i, j):
            (a, x), (b, y) = keys[i], keys[j]
            fib = p.fibre(a)
            out = []
            for u in p.base.hom(a, b):
                uy = p.star(u, y)
                for h in fib.hom(x, uy):
                    out.append((u, h))
            return out

        def compose_fn(g, f):
            (a, _x) = keys[f.dom]
            u, h = f.tag
            v, k = g.tag
            vu = p.base.compose(v, u)
            return (vu, p.fibre(a).compose(p.star_ar(u, k), h))

        def identity_fn(i):
            (a, x) = keys[i]
            return (p.base.identity(a), p.fibre(a).identity(x))

        super().__init__(keys, hom_fn, compose_fn, identity_fn,
                         name=f"total({p.name})",
                         label_fn=lambda k: f"({p.base.object_label(k[0])},"
                                            f"{p.fibre(k[0]).object_label(k[1])})")

    def obj(self, a, x):
        return self.id_of_key((a, x))

    def base_of(self, i):
        return self.object_key(i)[0]

    def projection_arrow(self, f):
        return f.tag[0]


def build_total(p: IndexedFibration, *, check=True, bound=None) -> TotalCategory:
    """Total category; raises SplitViolation when the indexed presentation is
    not split."""
    if check:
        rep = check_split(p, bound=bound)
        if not rep.ok:
            raise SplitViolation(f"split laws fail: {rep.violations[:3]}")
    return TotalCategory(p)


def cartesian_lift(p: IndexedFibration, u, y, total: TotalCategory = None):
    """The canonical lift (u, id_{u*Y}): (A, u*Y) -> (B, Y) over u: A -> B."""
    total = total or TotalCategory(p)
    a, b = p.base.dom(u), p.base.cod(u)
    uy = p.star(u, y)
    dom_id = total.obj(a, uy)
    cod_id = total.obj(b, y)
    return LArr(dom_id, cod_id, (u, p.fibre(a).identity(uy)))


def check_cartesian(total: TotalCategory, lift) -> LawReport:
    """Exhaustive unique-factorization check for a candidate cartesian arrow:
    every arrow g into its codomain whose base leg factors through u does so
    uniquely through the lift."""
    p = total.p
    rep = LawReport()
    u = lift.tag[0]
    a = total.object_key(lift.dom)[0]
    n = 0
    for zi in total.objects:
        (zb, _zx) = total.object_key(zi)
        for g in total.hom(zi, lift.cod):
            w_candidates = [w for w in p.base.hom(zb, a)
                            if p.base.compose(u, w) == g.tag[0]]
            for w in w_candidates:
                n += 1
                hits = [h for h in total.hom(zi, lift.dom)
                        if h.tag[0] == w and total.compose(lift, h) == g]
                if len(hits) != 1:
                    rep.violations.append({
                        "kind": "cartesian-factorization",
                        "through": _arr_json(w), "count": len(hits)})
    rep.checked = {"factorization_instances": n}
    return rep


# ---------------------------------------------------------------------------
# opposite fibration


def _op_structure(st: Optional[ChosenStructure]) -> Optional[ChosenStructure]:
    if st is None:
        return None
    out = ChosenStructure(partial_ok=st.partial_ok)
    out.terminal, out.terminal_maps = st.initial, dict(st.initial_maps)
    out.initial, out.initial_maps = st.terminal, dict(st.terminal_maps)
    out.products = dict(st.coproducts)
    out.coproducts = dict(st.products)
    out.weak_products = set(st.weak_coproducts)
    out.weak_coproducts = set(st.weak_products)
    return out


def opposite_fibration(p: IndexedFibration) -> IndexedFibration:
    """Fibrewise opposite: same base, fibre(A) -> fibre(A)^op,
    reindex(u) -> reindex(u)^op.  Applying it twice returns the original
    presentation."""
    prior = getattr(p, "_op_of", None)
    if prior is not None:
        return prior
    fibres = {a: opposite(c) for a, c in p.fibres.items()}

    def reindex_fn(u):
        return op_functor(p.reindex_along(u))

    q = IndexedFibration(p.base, p.base_structure, fibres,
                         reindex_fn=reindex_fn,
                         fibre_structures={a: _op_structure(st)
                                           for a, st in p.fibre_structures.items()},
                         name=f"op({p.name})", partial=p.partial)
    # quantifier adjoints dualize: ∐ along u becomes ∏ along u and vice versa
    from .adjunctions import op_adjunction, op_weak_adjunction
    for u, data in p.product_along.items():
        q.coproduct_along[u] = op_adjunction(data)
    for u, data in p.coproduct_along.items():
        q.product_along[u] = op_adjunction(data)
    for jk, data in p.product_pair.items():
        q.coproduct_pair[jk] = op_adjunction(data)
    for jk, data in p.coproduct_pair.items():
        q.product_pair[jk] = op_adjunction(data)
    for u, data in p.weak_product_along.items():
        q.weak_coproduct_along[u] = op_weak_adjunction(data)
    for u, data in p.weak_coproduct_along.items():
        q.weak_product_along[u] = op_weak_adjunction(data)
    q._op_of = p
    return q


def fibrations_structurally_equal(p: IndexedFibration, q: IndexedFibration,
                                  bound=None) -> bool:
    """Presentation-level equality: same base tables, object-identical
    fibres (same hom tuples), equal reindexing maps."""
    if p is q:
        return True
    if p.base is not q.base and not (
            hasattr(p.base, "equal_presentation") and hasattr(q.base, "equal_presentation")
            and p.base.equal_presentation(q.base)):
        return False
    objs = [a for a in p.base.objects if bound is None or a <= bound]
    for a in objs:
        cp, cq = p.fibre(a), q.fibre(a)
        if cp.n_objects != cq.n_objects:
            return False
        for x in cp.objects:
            for y in cp.objects:
                if cp.hom(x, y) != cq.hom(x, y):
                    return False
    for a in objs:
        for b in objs:
            for u in p.base.hom(a, b):
                if not functors_equal(p.reindex_along(u), q.reindex_along(u)):
                    return False
    return True


# ---------------------------------------------------------------------------
# fibre structure report


@dataclass
class FibreVerdict:
    exists: str = "none"            # "strict" | "weak" | "none"
    witness: object = None
    counterexample: object = None

    def to_json(self):
        return {"exists": self.exists, "witness": self.witness,
                "counterexample": self.counterexample}


@dataclass
class FibreReport:
    per_fibre: dict = field(default_factory=dict)
    reindex_preserves_products: bool = True
    reindex_preserves_coproducts: bool = True
    reindex_defects: list = field(default_factory=list)
    bounded: bool = False

    def fibred(self, kind, weak_ok=True):
        """True when every fibre has the structure and reindexing preserves
        it.  kind in {terminal, products, initial, coproducts}."""
        want = ("strict",) if not weak_ok else ("strict", "weak")
        all_have = all(v[kind].exists in want for v in self.per_fibre.values())
        if kind in ("products", "terminal"):
            return all_have and self.reindex_preserves_products
        return all_have and self.reindex_preserves_coproducts

    def to_json(self):
        return {
            "per_fibre": {str(a): {k: v.to_json() for k, v in d.items()}
                          for a, d in self.per_fibre.items()},
            "reindex_preserves_products": self.reindex_preserves_products,
            "reindex_preserves_coproducts": self.reindex_preserves_coproducts,
            "reindex_defects": self.reindex_defects,
            "bounded": self.bounded,
        }


def _mediating_counts(cat, c, p1, p2, f, g):
    z = cat.dom(f)
    n = 0
    for m in cat.hom(z, c):
        if cat.compose(p1, m) == f and cat.compose(p2, m) == g:
            n += 1
    return n


def is_product_cone(cat, c, p1, p2, *, weak, objects=None):
    """Does (c, p1, p2) satisfy the (weak) universal property of a product
    of cod(p1), cod(p2)?"""
    objects = cat.objects if objects is None else objects
    a, b = cat.cod(p1), cat.cod(p2)
    for z in objects:
        for f in cat.hom(z, a):
            for g in cat.hom(z, b):
                n = _mediating_counts(cat, c, p1, p2, f, g)
                if weak and n < 1:
                    return False
                if not weak and n != 1:
                    return False
    return True


def is_coproduct_cocone(cat, c, j1, j2, *, weak, objects=None):
    objects = cat.objects if objects is None else objects
    a, b = cat.dom(j1), cat.dom(j2)
    for z in objects:
        for f in cat.hom(a, z):
            for g in cat.hom(b, z):
                n = 0
                for m in cat.hom(c, z):
                    if cat.compose(m, j1) == f and cat.compose(m, j2) == g:
                        n += 1
                if weak and n < 1:
                    return False
                if not weak and n != 1:
                    return False
    return True


def _search_product(cat, a, b, objects):
    """First (c, p1, p2, strictness) in canonical order, or None."""
    weak_hit = None
    for c in objects:
        for p1 in cat.hom(c, a):
            for p2 in cat.hom(c, b):
                if is_product_cone(cat, c, p1, p2, weak=False, objects=objects):
                    return (c, p1, p2, "strict")
                if weak_hit is None and is_product_cone(cat, c, p1, p2, weak=True,
                                                        objects=objects):
                    weak_hit = (c, p1, p2, "weak")
    return weak_hit


def _search_coproduct(cat, a, b, objects):
    weak_hit = None
    for c in objects:
        for j1 in cat.hom(a, c):
            for j2 in cat.hom(b, c):
                if is_coproduct_cocone(cat, c, j1, j2, weak=False, objects=objects):
                    return (c, j1, j2, "strict")
                if weak_hit is None and is_coproduct_cocone(cat, c, j1, j2, weak=True,
                                                            objects=objects):
                    weak_hit = (c, j1, j2, "weak")
    return weak_hit


def fibre_structure_report(p: IndexedFibration, bound=None) -> FibreReport:
    """Per-fibre (weak/strict) finite product and coproduct verdicts, plus
    whether every reindexing functor preserves the found cones."""
    if bound is None:
        bound = getattr(p.base, "rank_bound", None)
    rep = FibreReport()
    base_objs = [a for a in p.base.objects if bound is None or a <= bound]
    rep.bounded = len(base_objs) < p.base.n_objects
    found_products = {}
    found_coproducts = {}
    for a in base_objs:
        fib = p.fibre(a)
        objs = list(fib.objects)
        d = {}
        # terminal: weak = every object has an arrow into it
        term = None
        for t in objs:
            if all(len(fib.hom(x, t)) == 1 for x in objs):
                term = (t, "strict")
                break
        if term is None:
            for t in objs:
                if all(len(fib.hom(x, t)) >= 1 for x in objs):
                    term = (t, "weak")
                    break
        d["terminal"] = FibreVerdict(term[1], term[0]) if term else FibreVerdict()
        init = None
        for t in objs:
            if all(len(fib.hom(t, x)) == 1 for x in objs):
                init = (t, "strict")
                break
        if init is None:
            for t in objs:
                if all(len(fib.hom(t, x)) >= 1 for x in objs):
                    init = (t, "weak")
                    break
        d["initial"] = FibreVerdict(init[1], init[0]) if init else FibreVerdict()

        prod_kind, coprod_kind = "strict", "strict"
        prod_fail = coprod_fail = None
        prods, coprods = {}, {}
        for x in objs:
            for y in objs:
                got = _search_product(fib, x, y, objs)
                if got is None:
                    prod_kind = "none"
                    prod_fail = [x, y]
                    break
                prods[(x, y)] = got
                if got[3] == "weak" and prod_kind == "strict":
                    prod_kind = "weak"
            if prod_kind == "none":
                break
        for x in objs:
            for y in objs:
                got = _search_coproduct(fib, x, y, objs)
                if got is None:
                    coprod_kind = "none"
                    coprod_fail = [x, y]
                    break
                coprods[(x, y)] = got
                if got[3] == "weak" and coprod_kind == "strict":
                    coprod_kind = "weak"
            if coprod_kind == "none":
                break
        d["products"] = FibreVerdict(prod_kind, counterexample=prod_fail) \
            if prod_kind == "none" else FibreVerdict(prod_kind, witness=len(prods))
        d["coproducts"] = FibreVerdict(coprod_kind, counterexample=coprod_fail) \
            if coprod_kind == "none" else FibreVerdict(coprod_kind, witness=len(coprods))
        rep.per_fibre[a] = d
        found_products[a] = prods if prod_kind != "none" else None
        found_coproducts[a] = coprods if coprod_kind != "none" else None

    # preservation by reindexing: the image of a found cone must still be a
    # (weak) cone of the images
    for a in base_objs:
        for b in base_objs:
            for u in p.base.hom(a, b):
                F = p.reindex_along(u)
                tgt = p.fibre(a)
                tgt_objs = list(tgt.objects)
                prods = found_products.get(b)
                if prods:
                    for (x, y), (c, p1, p2, kind) in prods.items():
                        ok = is_product_cone(tgt, F.ob(c), F.ar(p1), F.ar(p2),
                                             weak=(kind == "weak"), objects=tgt_objs)
                        if not ok and kind == "strict":
                            ok = is_product_cone(tgt, F.ob(c), F.ar(p1), F.ar(p2),
                                                 weak=True, objects=tgt_objs)
                            if ok:
                                rep.reindex_defects.append(
                                    {"kind": "product-weakened", "base_arrow": _arr_json(u),
                                     "pair": [x, y]})
                        if not ok:
                            rep.reindex_preserves_products = False
                            rep.reindex_defects.append(
                                {"kind": "product-not-preserved",
                                 "base_arrow": _arr_json(u), "pair": [x, y]})
                coprods = found_coproducts.get(b)
                if coprods:
                    for (x, y), (c, j1, j2, kind) in coprods.items():
                        ok = is_coproduct_cocone(tgt, F.ob(c), F.ar(j1), F.ar(j2),
                                                 weak=(kind == "weak"), objects=tgt_objs)
                        if not ok and kind == "strict":
                            ok = is_coproduct_cocone(tgt, F.ob(c), F.ar(j1), F.ar(j2),
                                                     weak=True, objects=tgt_objs)
                            if ok:
                                rep.reindex_defects.append(
                                    {"kind": "coproduct-weakened",
                                     "base_arrow": _arr_json(u), "pair": [x, y]})
                        if not ok:
                            rep.reindex_preserves_coproducts = False
                            rep.reindex_defects.append(
                                {"kind": "coproduct-not-preserved",
                                 "base_arrow": _arr_json(u), "pair": [x, y]})
    return rep


# ---------------------------------------------------------------------------
# products in the total category (via fibred structure)


def total_product(p: IndexedFibration, o1, o2, *, weak=False,
                  total: TotalCategory = None):
    """(A,X)×(B,Y) = (A×B, pi_A*X × pi_B*Y) with its projections, verified
    (weak or strict) in the total category.

    o1, o2 are (base object, fibre object) pairs.  Returns a dict with the
    object, projections, and the verification verdict.
    """
    (a, x), (b, y) = o1, o2
    ab, pa, pb = p.ops.product(a, b)
    fib = p.fibre(ab)
    xa = p.star(pa, x)
    yb = p.star(pb, y)
    st = p.fibre_structure(ab)
    cone = None
    if st is not None and (xa, yb) in st.products:
        c, p1, p2 = st.products[(xa, yb)]
        cone = (c, p1, p2)
    else:
        got = _search_product(fib, xa, yb, list(fib.objects))
        if got is None:
            raise MissingStructure(
                f"no (weak) fibre product of {xa},{yb} over base object {ab}")
        cone = got[:3]
    c, p1, p2 = cone
    total = total or TotalCategory(p)
    obj = total.obj(ab, c)
    proj1 = LArr(obj, total.obj(a, x), (pa, p1))
    proj2 = LArr(obj, total.obj(b, y), (pb, p2))
    # verify the (weak) universal property in the total category
    defects = []
    count_ok = (lambda n: n >= 1) if weak else (lambda n: n == 1)
    for zi in total.objects:
        for f in total.hom(zi, total.obj(a, x)):
            for g in total.hom(zi, total.obj(b, y)):
                n = 0
                for m in total.hom(zi, obj):
                    if total.compose(proj1, m) == f and total.compose(proj2, m) == g:
                        n += 1
                if not count_ok(n):
                    defects.append({"cone_at": total.object_key(zi), "count": n})
    return {"object": (ab, c), "projections": (proj1, proj2),
            "weak": weak, "defects": defects, "ok": not defects}


# ---------------------------------------------------------------------------
# morphisms of fibrations


class FibrationMorphism:
    """Morphism of fibrations over the same base: a fibre functor per base
    object, commuting strictly with reindexing."""

    def __init__(self, source: IndexedFibration, target: IndexedFibration,
                 fibre_functors, name=""):
        self.source = source
        self.target = target
        self.fibre_functors = fibre_functors   # base object -> Functor
        self.name = name

    def at(self, a) -> Functor:
        return self.fibre_functors[a]

    def check(self, bound=None, object_filter=None, functor_laws=True) -> LawReport:
        rep = LawReport()
        p, q = self.source, self.target
        objs = [a for a in p.base.objects if bound is None or a <= bound]
        rep.bounded = len(objs) < p.base.n_objects

        def fibre_objs(a, into=None):
            if object_filter is None:
                return None
            try:
                return object_filter(a, into)
            except TypeError:
                return object_filter(a)

        if functor_laws:
            for a in objs:
                for v in check_functor(self.at(a), objects=fibre_objs(a)):
                    rep.violations.append({"kind": "fibre-functor-law",
                                           "object": a, **v})
        for a in objs:
            for b in objs:
                for u in p.base.hom(a, b):
                    Fa, Fb = self.at(a), self.at(b)
                    lhs = Functor(p.fibre(b), q.fibre(a),
                                  lambda x, Fa=Fa, u=u: Fa.ob(p.star(u, x)),
                                  lambda h, Fa=Fa, u=u: Fa.ar(p.star_ar(u, h)))
                    rhs = Functor(p.fibre(b), q.fibre(a),
                                  lambda x, Fb=Fb, u=u: q.star(u, Fb.ob(x)),
                                  lambda h, Fb=Fb, u=u: q.star_ar(u, Fb.ar(h)))
                    if not functors_equal(lhs, rhs, objects=fibre_objs(b, a)):
                        rep.violations.append({"kind": "reindex-compat",
                                               "base_arrow": _arr_json(u)})
        return rep


def compose_fibration_morphisms(second: FibrationMorphism, first: FibrationMorphism,
                                name="") -> FibrationMorphism:
    from .cat import compose_functors
    functors = {a: compose_functors(second.at(a), first.at(a))
                for a in first.source.base.objects}
    return FibrationMorphism(first.source, second.target, functors, name=name)


def check_two_cell(morphism_f: FibrationMorphism, morphism_g: FibrationMorphism,
                   components) -> LawReport:
    """A 2-cell between parallel fibration morphisms: per-total-object
    vertical components, natural, projecting to the identity."""
    rep = LawReport()
    p, q = morphism_f.source, morphism_f.target
    for a in p.base.objects:
        fib_q = q.fibre(a)
        for x in p.fibre(a).objects:
            comp = components.get((a, x))
            if comp is None:
                rep.violations.append({"kind": "two-cell-missing", "at": [a, x]})
                continue
            if fib_q.dom(comp) != morphism_f.at(a).ob(x) or \
                    fib_q.cod(comp) != morphism_g.at(a).ob(x):
                rep.violations.append({"kind": "two-cell-typing", "at": [a, x]})
    for a in p.base.objects:
        fib_q = q.fibre(a)
        for x in p.fibre(a).objects:
            for y in p.fibre(a).objects:
                for h in p.fibre(a).hom(x, y):
                    lhs = fib_q.compose(components[(a, y)], morphism_f.at(a).ar(h))
                    rhs = fib_q.compose(morphism_g.at(a).ar(h), components[(a, x)])
                    if lhs != rhs:
                        rep.violations.append({"kind": "two-cell-naturality",
                                               "at": [a, _arr_json(h)]})
    return rep


# ---------------------------------------------------------------------------
# full subfibrations and equivalence checking


def full_subfibration(p: IndexedFibration, keep, name="") -> IndexedFibration:
    """Full subfibration on fibrewise object subsets ``keep[a]``; the subsets
    must be closed under every reindexing functor."""
    subs = {a: full_subcategory(p.fibre(a), keep[a],
                                name=f"{name}_{a}" if name else "")
            for a in p.base.objects}

    def reindex_fn(u):
        a, b = p.base.dom(u), p.base.cod(u)
        F = p.reindex_along(u)
        sa, sb = subs[a], subs[b]

        def ob(x):
            target = F.ob(sb.ambient_object(x))
            got = sa.ambient_id.get(target)
            if got is None:
                raise MissingStructure(
                    f"subfibration not closed under reindexing at base arrow {u!r}")
            return got

        def ar(h):
            amb = F.ar(h.tag)
            return LArr(ob(h.dom), ob(h.cod), amb)

        return Functor(sb, sa, ob, ar)

    q = IndexedFibration(p.base, p.base_structure, subs, reindex_fn=reindex_fn,
                         name=name or f"sub({p.name})", partial=p.partial)
    q.ambient = p
    return q


@dataclass
class EquivalenceReport:
    """Fibrewise essential surjectivity witnesses and full-faithfulness
    hom-set bijection counts for a fibration morphism."""

    ess_surj: dict = field(default_factory=dict)    # a -> {target obj: (src obj, iso)}
    hom_counts: dict = field(default_factory=dict)  # a -> [(x, y, n_src, n_tgt)]
    defects: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.defects

    def to_json(self):
        return {
            "ok": self.ok,
            "ess_surj": {str(a): {str(k): [v[0], _arr_json(v[1][0])]
                                  for k, v in d.items()}
                         for a, d in self.ess_surj.items()},
            "hom_counts": {str(a): v for a, v in self.hom_counts.items()},
            "defects": self.defects[:20],
        }


def check_fibrewise_equivalence(m: FibrationMorphism, bound=None) -> EquivalenceReport:
    """Essential surjectivity (witness isos) and full faithfulness
    (injective hom maps with matching counts), fibre by fibre."""
    from .cat import iso_search
    rep = EquivalenceReport()
    p, q = m.source, m.target
    objs = [a for a in p.base.objects if bound is None or a <= bound]
    for a in objs:
        F = m.at(a)
        src, tgt = p.fibre(a), q.fibre(a)
        wit = {}
        image = {F.ob(x): x for x in src.objects}
        for t in tgt.objects:
            hit = None
            if t in image:
                hit = (image[t], (tgt.identity(t), tgt.identity(t)))
            else:
                for x in src.objects:
                    iso = iso_search(tgt, F.ob(x), t)
                    if iso is not None:
                        hit = (x, iso)
                        break
            if hit is None:
                rep.defects.append({"kind": "not-ess-surjective", "fibre": a,
                                    "object": t})
            else:
                wit[t] = hit
        rep.ess_surj[a] = wit
        counts = []
        for x in src.objects:
            for y in src.objects:
                h_src = src.hom(x, y)
                h_tgt = tgt.hom(F.ob(x), F.ob(y))
                images = {F.ar(h) for h in h_src}
                counts.append((x, y, len(h_src), len(h_tgt)))
                if len(images) != len(h_src):
                    rep.defects.append({"kind": "not-faithful", "fibre": a,
                                        "pair": [x, y]})
                if len(h_src) != len(h_tgt):
                    rep.defects.append({"kind": "not-full", "fibre": a,
                                        "pair": [x, y],
                                        "src": len(h_src), "tgt": len(h_tgt)})
        rep.hom_counts[a] = counts
    return rep


def verify_fibration_iso(m: FibrationMorphism, bound=None,
                         object_filter=None, functor_laws=None) -> LawReport:
    """Isomorphism-of-fibrations check: fibrewise object and hom bijections
    that commute with reindexing.  object_filter(a) may restrict the objects
    swept per fibre; the quadratic functor-law sweep is skipped on
    rank-bounded virtual models unless forced (bijections and commutation
    are what the isomorphism claim needs; composition preservation is
    covered by the category law suites)."""
    if functor_laws is None:
        functor_laws = object_filter is None
    rep = m.check(bound=bound, object_filter=object_filter,
                  functor_laws=functor_laws)
    p, q = m.source, m.target
    objs = [a for a in p.base.objects if bound is None or a <= bound]
    for a in objs:
        F = m.at(a)
        src, tgt = p.fibre(a), q.fibre(a)
        keep = list(src.objects) if object_filter is None else object_filter(a)
        full = object_filter is None
        images = {F.ob(x) for x in keep}
        if len(images) != len(keep) or (full and src.n_objects != tgt.n_objects):
            rep.violations.append({"kind": "object-bijection", "fibre": a,
                                   "src": src.n_objects, "tgt": tgt.n_objects,
                                   "image": len(images)})
            continue
        for x in keep:
            for y in keep:
                h_src = src.hom(x, y)
                h_tgt = tgt.hom(F.ob(x), F.ob(y))
                images_h = {F.ar(h) for h in h_src}
                if len(images_h) != len(h_src) or len(h_src) != len(h_tgt):
                    rep.violations.append({"kind": "hom-bijection", "fibre": a,
                                           "pair": [x, y], "src": len(h_src),
                                           "tgt": len(h_tgt)})
    return rep
