"""The simple coproduct (Sum), simple product (Prod) and Dialectica (Dial)
completions of a split fibration, with the structure they transport:
canonical simple (co)products, fibred (weak) finite (co)products, one-sided
weak adjoints along coproduct injections, and weak (co)products of the total
category.

Conventions.  A Sum fibre over I has objects (X, alpha) with alpha in the
fibre over I×X and vertical arrows (f1: I×X -> Y, phi: alpha -> <pi_I,f1>*beta).
A Prod fibre has objects of the same shape and vertical arrows
(f1: I×Y -> X, phi: <pi_I,f1>*alpha -> beta).  Chosen base products must be
strictly associative and unital (checked once per completion); fibre data
over I×X×U therefore lives in one unambiguous fibre.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .adjunctions import (AdjunctionData, WeakAdjunctionData, as_weak,
                          adjunction_from_transposes, compose_weak,
                          find_adjoint, verify_adjunction)
from .cat import (LArr, LawReport, ChosenStructure, Functor, LazyCategory,
                  StructOps, _arr_json)
from .errors import MissingStructure, SplitViolation
from .fibration import (FibrationMorphism, IndexedFibration,
                        is_coproduct_cocone, is_product_cone,
                        verify_fibration_iso)


def _require_strict(p: IndexedFibration, what):
    viols = p.ops.strict_coherence_violations(getattr(p.base, "rank_bound", None))
    if viols:
        raise MissingStructure(
            f"{what} needs strictly associative/unital chosen base products; "
            f"violations: {viols[:3]}")


def fibre_ops(p: IndexedFibration, a) -> StructOps:
    """StructOps for the fibre over a (empty structure when none chosen)."""
    cache = getattr(p, "_fibre_ops", None)
    if cache is None:
        cache = {}
        p._fibre_ops = cache
    got = cache.get(a)
    if got is None:
        st = p.fibre_structure(a) or ChosenStructure()
        got = StructOps(p.fibre(a), st)
        cache[a] = got
    return got


# ---------------------------------------------------------------------------
# the Sum completion


def sum_completion(p: IndexedFibration, *, name=None) -> IndexedFibration:
    """Freely add simple coproducts: fibres of triples, reindexing by
    pairing, with the canonical coproduct adjunctions attached."""
    base, ops = p.base, p.ops
    if not p.ops.st.products:
        raise MissingStructure("sum completion needs chosen base products")

    def fibre_for(i):
        keys = []
        for x in base.objects:
            px = ops.try_product(i, x)
            if px is None:
                continue
            for alpha in p.fibre(px[0]).objects:
                keys.append((x, alpha))

        def hom_fn(a, b):
            (x, al) = keys[a]
            (y, be) = keys[b]
            ix, pi_i, _ = ops.product(i, x)
            fib = p.fibre(ix)
            out = []
            for f1 in base.hom(ix, y):
                u = ops.pair(pi_i, f1, i, y)
                target = p.star(u, be)
                for phi in fib.hom(al, target):
                    out.append((f1, phi))
            return out

        def compose_fn(g, f):
            (x, _al) = keys[f.dom]
            f1, phi = f.tag
            g1, psi = g.tag
            ix, pi_i, _ = ops.product(i, x)
            fib = p.fibre(ix)
            u = ops.pair(pi_i, f1, i, keys[f.cod][0])
            return (base.compose(g1, u), fib.compose(p.star_ar(u, psi), phi))

        def identity_fn(a):
            (x, al) = keys[a]
            ix = ops.product(i, x)
            return (ix[2], p.fibre(ix[0]).identity(al))

        return LazyCategory(keys, hom_fn, compose_fn, identity_fn,
                            name=f"Sum_{i}",
                            label_fn=lambda k: f"({base.object_label(i)},"
                                               f"{base.object_label(k[0])},{k[1]})")

    fibres = {i: fibre_for(i) for i in base.objects}

    def reindex_fn(u):
        i2, i = base.dom(u), base.cod(u)
        src, tgt = fibres[i], fibres[i2]

        def ob(a):
            (y, be) = src.object_key(a)
            iy2, pi_i2, pi_y = ops.product(i2, y)
            w = ops.pair(base.compose(u, pi_i2), pi_y, i, y)
            return tgt.id_of_key((y, p.star(w, be)))

        def ar(h):
            (y, _be) = src.object_key(h.dom)
            (y2, _be2) = src.object_key(h.cod)
            f1, phi = h.tag
            iy2, pi_i2, pi_y = ops.product(i2, y)
            w = ops.pair(base.compose(u, pi_i2), pi_y, i, y)
            return LArr(ob(h.dom), ob(h.cod),
                        (base.compose(f1, w), p.star_ar(w, phi)))

        return Functor(src, tgt, ob, ar, name=f"Sum*({base.arrow_label(u)})")

    sp = IndexedFibration(base, p.base_structure, fibres, reindex_fn=reindex_fn,
                          name=name or f"Sum({p.name})", partial=p.partial)
    sp.under = p
    sp.completion = "sum"
    # canonical simple coproducts along every chosen projection (first entry
    # for an arrow wins; all choices are canonically isomorphic)
    try:
        _require_strict(p, "the simple-coproduct structure of a sum completion")
        strict_ok = True
    except MissingStructure:
        strict_ok = False
    sp.strict_ok = strict_ok
    if strict_ok:
        for (j, k), (_jk, pj, _pk) in list(ops.st.products.items()):
            try:
                data = sum_simple_coproduct(sp, j, k)
            except MissingStructure:
                continue
            sp.coproduct_pair[(j, k)] = data
            sp.coproduct_along.setdefault(pj, data)
    return sp


def sum_simple_coproduct(sp: IndexedFibration, j, k) -> AdjunctionData:
    """The left adjoint to the pi_J-weakening of a sum completion,
    pi_J: J×K -> J, acting by (J×K, Y, beta) -> (J, K×Y, beta)."""
    p = sp.under
    base, ops = p.base, p.ops
    jk, pj, pk = ops.product(j, k)
    src, tgt = sp.fibre(jk), sp.fibre(j)

    def ob(a):
        (y, be) = src.object_key(a)
        ky = ops.product(k, y)[0]
        if ops.product(j, ky)[0] != ops.product(jk, y)[0]:
            raise MissingStructure("chosen products not strictly associative")
        return tgt.id_of_key((ky, be))

    def ar(h):
        (y, _be) = src.object_key(h.dom)
        (y2, _b2) = src.object_key(h.cod)
        g, gamma = h.tag
        factors = [j, k, y]
        pk3 = ops.projn(factors, 1)
        ky2 = ops.product(k, y2)[0]
        f1 = ops.pair(pk3, g, k, y2)
        return LArr(ob(h.dom), ob(h.cod), (f1, gamma))

    L = Functor(src, tgt, ob, ar, name=f"Sum-coprod({j},{k})")
    weakening = sp.reindex_along(pj)
    from .adjunctions import LazyComponents

    def unit_at(a):
        (y, be) = src.object_key(a)
        factors = [j, k, y]
        f1 = ops.pair(ops.projn(factors, 1), ops.projn(factors, 2), k, y)
        dom_fib = p.fibre(ops.prodn(factors))
        return LArr(a, weakening.ob(ob(a)), (f1, dom_fib.identity(be)))

    def counit_at(c):
        (z, de) = tgt.object_key(c)
        factors = [j, k, z]
        f1 = ops.projn(factors, 2)
        lrc = L.ob(weakening.ob(c))
        delta_obj = sp.fibre(j).object_key(lrc)[1]
        dom_fib = p.fibre(ops.prodn(factors))
        return LArr(lrc, c, (f1, dom_fib.identity(delta_obj)))

    return AdjunctionData(L, weakening, LazyComponents(unit_at),
                          LazyComponents(counit_at), name=f"coprod_pi({j};{k})")


# -- p-level simple quantifiers (fetch attached or search) -------------------

def p_sigma(p: IndexedFibration, j, k) -> AdjunctionData:
    """Genuine ∐ along pi_J: J×K -> J in p, keyed by the product pair."""
    got = p.coproduct_pair.get((j, k))
    if got is None:
        pj = p.ops.product(j, k)[1]
        got = find_adjoint(p, p.reindex_along(pj), "left",
                           name=f"sigma({j};{k})")
        if got is None:
            raise MissingStructure(f"no simple coproduct along projection ({j},{k})")
        p.coproduct_pair[(j, k)] = got
        p.coproduct_along.setdefault(pj, got)
    return got


def p_pi(p: IndexedFibration, j, k) -> AdjunctionData:
    """Genuine ∏ along pi_J: J×K -> J in p, keyed by the product pair."""
    got = p.product_pair.get((j, k))
    if got is None:
        pj = p.ops.product(j, k)[1]
        got = find_adjoint(p, p.reindex_along(pj), "right",
                           name=f"pi({j};{k})")
        if got is None:
            raise MissingStructure(f"no simple product along projection ({j},{k})")
        p.product_pair[(j, k)] = got
        p.product_along.setdefault(pj, got)
    return got


class DerivedRightAdjoint:
    """∏ along a generalized projection u = pi∘sigma, where sigma is the
    canonical symmetry prodn(src_factors) ≅ prodn(kept) × prodn(dropped)."""

    def __init__(self, p: IndexedFibration, src_factors, keep_idx):
        ops = p.ops
        self.p = p
        kept = [src_factors[i] for i in keep_idx]
        dropped = [src_factors[i] for i in range(len(src_factors))
                   if i not in keep_idx]
        if not dropped:
            raise MissingStructure("generalized projection must drop a factor")
        kept_obj = ops.prodn(kept)
        dropped_obj = ops.prodn(dropped)
        src_obj = ops.prodn(src_factors)
        keep_arr = ops.pairn([ops.projn(src_factors, i) for i in keep_idx], kept) \
            if len(kept) > 1 else ops.projn(src_factors, keep_idx[0])
        drop_list = [i for i in range(len(src_factors)) if i not in keep_idx]
        drop_arr = ops.pairn([ops.projn(src_factors, i) for i in drop_list], dropped) \
            if len(dropped) > 1 else ops.projn(src_factors, drop_list[0])
        sigma = ops.pair(keep_arr, drop_arr, kept_obj, dropped_obj)
        sigma_inv = ops.find_inverse(sigma)
        if sigma_inv is None:
            raise MissingStructure("symmetry for a generalized projection is not invertible")
        self.u = keep_arr
        self.sigma, self.sigma_inv = sigma, sigma_inv
        self.core = p_pi(p, kept_obj, dropped_obj)
        self.kept_obj, self.src_obj = kept_obj, src_obj

    def ob(self, w):
        return self.core.right.ob(self.p.star(self.sigma_inv, w))

    def ar(self, h):
        return self.core.right.ar(self.p.star_ar(self.sigma_inv, h))

    def flat(self, z, h):
        """hom(u*z, w) -> hom(z, ∏_u w)."""
        return self.core.flat(z, self.p.star_ar(self.sigma_inv, h))

    def sharp(self, z, w, g):
        """hom(z, ∏_u w) -> hom(u*z, w)."""
        return self.p.star_ar(self.sigma,
                              self.core.sharp(z, self.p.star(self.sigma_inv, w), g))


def sum_simple_product(sp: IndexedFibration, a1, a2) -> AdjunctionData:
    """Simple products transported to a sum completion: the right adjoint to
    the pi_{A1}-weakening sends (A1×A2, B, alpha) to
    (A1, B^{A2}, ∏_{<p1,p3>} <p1,p2,ev<p2,p3>>* alpha).  Needs a cartesian
    closed base (the exponentials actually used) and simple products in the
    underlying fibration."""
    p = sp.under
    base, ops = p.base, p.ops
    _require_strict(p, "simple products of a sum completion")
    a12, pa1, _ = ops.product(a1, a2)
    src = sp.fibre(a12)
    tgt = sp.fibre(a1)
    weakening = sp.reindex_along(pa1)

    def target_key(b):
        e, ev = ops.exponential(a2, b)
        factors = [a1, a2, e]
        p1, p2, p3 = (ops.projn(factors, i) for i in range(3))
        m = ops.pairn([p1, p2,
                       base.compose(ev, ops.pair(p2, p3, a2, e))], [a1, a2, b])
        der = DerivedRightAdjoint(p, factors, (0, 2))
        return e, m, der

    def G_ob(c):
        (b, alpha) = src.object_key(c)
        e, m, der = target_key(b)
        return tgt.id_of_key((e, der.ob(p.star(m, alpha))))

    def sigma2(c_obj):
        # A2 × (A1×C) -> (A1×A2) × C, the evident symmetry
        a1c = ops.product(a1, c_obj)[0]
        _, out_a2, out_ac = ops.product(a2, a1c)
        in_a1 = base.compose(ops.product(a1, c_obj)[1], out_ac)
        in_c = base.compose(ops.product(a1, c_obj)[2], out_ac)
        return ops.pairn([in_a1, out_a2, in_c], [a1, a2, c_obj])

    def flat(d, karr):
        # k = (g, phi): pi*(C,gamma) -> (B,alpha)  in Sum_{A1×A2}
        (c_obj, gamma) = tgt.object_key(d)
        (b, alpha) = src.object_key(karr.cod)
        g, phi = karr.tag
        s2 = sigma2(c_obj)
        h = ops.transpose_ac(base.compose(g, s2), a2,
                             ops.product(a1, c_obj)[0], b)
        der_u = DerivedRightAdjoint(p, [a1, a2, c_obj], (0, 2))
        psi = der_u.flat(gamma, phi)
        e, m, der = target_key(b)
        # Beck-Chevalley gives the on-the-nose equality of the two targets
        w = ops.pair(ops.product(a1, c_obj)[1], h, a1, e)
        expected = p.star(w, der.ob(p.star(m, alpha)))
        got = p.fibre(ops.product(a1, c_obj)[0]).cod(psi)
        if expected != got:
            raise MissingStructure(
                "simple products of the underlying fibration violate strict "
                "Beck-Chevalley; cannot transport to the sum completion")
        return LArr(d, G_ob(karr.cod), (h, psi))

    def sharp(d, c, garr):
        (c_obj, gamma) = tgt.object_key(d)
        (b, alpha) = src.object_key(c)
        h, psi = garr.tag
        s2 = sigma2(c_obj)
        s2_inv = ops.find_inverse(s2)
        g = base.compose(ops.untranspose_ac(h, a2, ops.product(a1, c_obj)[0], b),
                         s2_inv)
        der_u = DerivedRightAdjoint(p, [a1, a2, c_obj], (0, 2))
        fac = [a1, a2, c_obj]
        pi12 = ops.pairn([ops.projn(fac, 0), ops.projn(fac, 1)], [a1, a2])
        w_target = p.star(ops.pair(pi12, g, a12, b), alpha)
        phi = der_u.sharp(gamma, w_target, psi)
        return LArr(weakening.ob(d), c, (g, phi))

    data = adjunction_from_transposes(weakening, G_ob, flat, sharp,
                                      name=f"prod_pi({a1};{a2})")
    return data


# ---------------------------------------------------------------------------
# the Prod completion


def prod_completion(p: IndexedFibration, *, name=None,
                    compare_duality=True) -> IndexedFibration:
    """Freely add simple products; dually shaped triples.  When
    compare_duality is set, the comparison with op(Sum(op(p))) is built and
    verified; the report is attached as .duality_report."""
    base, ops = p.base, p.ops
    if not p.ops.st.products:
        raise MissingStructure("prod completion needs chosen base products")

    def fibre_for(i):
        keys = []
        for x in base.objects:
            px = ops.try_product(i, x)
            if px is None:
                continue
            for alpha in p.fibre(px[0]).objects:
                keys.append((x, alpha))

        def hom_fn(a, b):
            (x, al) = keys[a]
            (y, be) = keys[b]
            iy, pi_i, _ = ops.product(i, y)
            fib = p.fibre(iy)
            out = []
            for f1 in base.hom(iy, x):
                u = ops.pair(pi_i, f1, i, x)
                source = p.star(u, al)
                for phi in fib.hom(source, be):
                    out.append((f1, phi))
            return out

        def compose_fn(g, f):
            (z, _c) = keys[g.cod]
            f1, phi = f.tag
            g1, psi = g.tag
            iz, pi_i, _ = ops.product(i, keys[g.cod][0])
            fib = p.fibre(iz)
            w = ops.pair(pi_i, g1, i, keys[f.cod][0])
            return (base.compose(f1, w), fib.compose(psi, p.star_ar(w, phi)))

        def identity_fn(a):
            (x, al) = keys[a]
            ix = ops.product(i, x)
            return (ix[2], p.fibre(ix[0]).identity(al))

        return LazyCategory(keys, hom_fn, compose_fn, identity_fn,
                            name=f"Prod_{i}",
                            label_fn=lambda k: f"({base.object_label(i)},"
                                               f"{base.object_label(k[0])},{k[1]})")

    fibres = {i: fibre_for(i) for i in base.objects}

    def reindex_fn(u):
        i2, i = base.dom(u), base.cod(u)
        src, tgt = fibres[i], fibres[i2]

        def w_for(y):
            iy2, pi_i2, pi_y = ops.product(i2, y)
            return ops.pair(base.compose(u, pi_i2), pi_y, i, y)

        def ob(a):
            (y, be) = src.object_key(a)
            return tgt.id_of_key((y, p.star(w_for(y), be)))

        def ar(h):
            (y2, _b2) = src.object_key(h.cod)
            f1, phi = h.tag
            w = w_for(y2)
            return LArr(ob(h.dom), ob(h.cod),
                        (base.compose(f1, w), p.star_ar(w, phi)))

        return Functor(src, tgt, ob, ar, name=f"Prod*({base.arrow_label(u)})")

    pp = IndexedFibration(base, p.base_structure, fibres, reindex_fn=reindex_fn,
                          name=name or f"Prod({p.name})", partial=p.partial)
    pp.under = p
    pp.completion = "prod"
    try:
        _require_strict(p, "the simple-product structure of a prod completion")
        strict_ok = True
    except MissingStructure:
        strict_ok = False
    pp.strict_ok = strict_ok
    if strict_ok:
        for (j, k), (_jk, pj, _pk) in list(ops.st.products.items()):
            try:
                data = prod_simple_product(pp, j, k)
            except MissingStructure:
                continue
            pp.product_pair[(j, k)] = data
            pp.product_along.setdefault(pj, data)
    if compare_duality:
        pp.duality_report = prod_duality_report(p, pp)
    return pp


def prod_simple_product(pp: IndexedFibration, j, k) -> AdjunctionData:
    """∏_{pi_J}(J×K, Y, beta) = (J, K×Y, beta) on a prod completion."""
    p = pp.under
    base, ops = p.base, p.ops
    jk, pj, _ = ops.product(j, k)
    src, tgt = pp.fibre(jk), pp.fibre(j)

    def ob(a):
        (y, be) = src.object_key(a)
        ky = ops.product(k, y)[0]
        if ops.product(j, ky)[0] != ops.product(jk, y)[0]:
            raise MissingStructure("chosen products not strictly associative")
        return tgt.id_of_key((ky, be))

    def ar(h):
        (y2, _b2) = src.object_key(h.cod)
        g, gamma = h.tag
        factors = [j, k, y2]
        pk3 = ops.projn(factors, 1)
        f1 = ops.pair(pk3, g, k, src.object_key(h.dom)[0])
        return LArr(ob(h.dom), ob(h.cod), (f1, gamma))

    R = Functor(src, tgt, ob, ar, name=f"Prod-prod({j},{k})")
    weakening = pp.reindex_along(pj)
    from .adjunctions import LazyComponents

    def unit_at(c):
        (z, de) = tgt.object_key(c)
        factors = [j, k, z]
        f1 = ops.projn(factors, 2)
        rpc = R.ob(weakening.ob(c))
        _, p_jk, p_z = ops.product(jk, z)
        w = ops.pair(base.compose(pj, p_jk), p_z, j, z)
        dom_fib = p.fibre(ops.prodn(factors))
        return LArr(c, rpc, (f1, dom_fib.identity(p.star(w, de))))

    def counit_at(a):
        (y, be) = src.object_key(a)
        factors = [j, k, y]
        f1 = ops.pair(ops.projn(factors, 1), ops.projn(factors, 2), k, y)
        dom_fib = p.fibre(ops.prodn(factors))
        return LArr(weakening.ob(ob(a)), a, (f1, dom_fib.identity(be)))

    return AdjunctionData(weakening, R, LazyComponents(unit_at),
                          LazyComponents(counit_at),
                          name=f"prod_pi[Prod]({j};{k})")


def prod_duality_functors(p: IndexedFibration, pp: IndexedFibration,
                          sop: IndexedFibration) -> dict:
    """Per-fibre comparison functors Prod(p)_I -> op(Sum(op p))_I: identical
    object keys, arrow payloads re-oriented."""
    from .cat import _flip
    functors = {}
    for i in p.base.objects:
        src = pp.fibre(i)
        inner_tgt = sop.fibre(i)

        def make(src, inner_tgt):
            def ob(a):
                # object keys agree on the nose (fibre object ids are shared
                # between a category and its opposite view)
                (x, al) = src.object_key(a)
                return inner_tgt.id_of_key((x, al))

            def ar(h):
                f1, phi = h.tag
                inner = LArr(ob(h.cod), ob(h.dom), (f1, _flip(phi)))
                return _flip(inner)

            return ob, ar

        ob, ar = make(src, inner_tgt)
        from .fibration import opposite_fibration as _opf
        functors[i] = Functor(src, _opf(sop).fibre(i), ob, ar, name=f"dual_{i}")
    return functors


def prod_duality_report(p: IndexedFibration, pp: IndexedFibration) -> LawReport:
    """Verify Prod(p) ≅ op(Sum(op(p))) as an isomorphism of fibrations."""
    from .fibration import opposite_fibration
    pop = opposite_fibration(p)
    sop = sum_completion(pop, name=f"Sum({pop.name})")
    target = opposite_fibration(sop)
    functors = prod_duality_functors(p, pp, sop)
    m = FibrationMorphism(pp, target, functors, name="prod-duality")
    rank = getattr(p.base, "rank_bound", None)
    obj_filter = None
    if rank is not None:
        def obj_filter(a, into=None, _pp=pp, _r=rank):
            return [x for x in _pp.fibre(a).objects
                    if _pp.fibre(a).object_key(x)[0] <= _r]
    return verify_fibration_iso(m, bound=rank, object_filter=obj_filter)


# ---------------------------------------------------------------------------
# the Dial completion


@dataclass
class DialResult:
    fibration: IndexedFibration
    sum_prod: IndexedFibration
    iso: FibrationMorphism
    iso_report: LawReport

    @property
    def ok(self):
        return self.iso_report.ok


def dial_completion(p: IndexedFibration, *, name=None, prod=None,
                    verify=True) -> DialResult:
    """Dial(p) = Sum(Prod(p)), presented with quadruple object keys
    (X, U, alpha) and flattened morphism payloads (f0, f1, phi); composition
    and reindexing are transported along the explicit isomorphism, which is
    verified fibrewise."""
    pp = prod if prod is not None else prod_completion(p, compare_duality=False)
    if pp.under is not p:
        raise MissingStructure("supplied prod completion belongs to another fibration")
    sp = sum_completion(pp, name=f"Sum({pp.name})")
    attach_sum_simple_products(sp)

    def key_fn(i, k):
        (x, inner_id) = k
        ix = p.ops.product(i, x)[0]
        (u, alpha) = pp.fibre(ix).object_key(inner_id)
        return (x, u, alpha)

    def key_inv_fn(i, k):
        (x, u, alpha) = k
        ix = p.ops.product(i, x)[0]
        return (x, pp.fibre(ix).id_of_key((u, alpha)))

    dial, morphism = _translate_dial(sp, pp, p, key_fn, key_inv_fn,
                                     name=name or f"Dial({p.name})")
    if not verify:
        dial.under = pp
        dial.completion = "sum"
        dial.strict_ok = sp.strict_ok
        dial.dial_of = p
        return DialResult(dial, sp, morphism, LawReport())
    rank = getattr(p.base, "rank_bound", None)
    obj_filter = None
    if rank is not None:
        caps = {}
        for a in p.base.objects:
            c = -1
            for cand in range(rank + 1):
                try:
                    p.ops.prodn([a, cand, cand])
                    c = cand
                except MissingStructure:
                    break
            caps[a] = c

        def obj_filter(a, into=None, _d=dial, _caps=caps):
            c = _caps.get(a, -1)
            if into is not None:
                c = min(c, _caps.get(into, -1))
            return [x for x in _d.fibre(a).objects
                    if _d.fibre(a).object_key(x)[0] <= c
                    and _d.fibre(a).object_key(x)[1] <= c]
    report = verify_fibration_iso(morphism, bound=rank, object_filter=obj_filter)
    dial.under = pp
    dial.completion = "sum"
    dial.strict_ok = sp.strict_ok
    dial.dial_of = p
    return DialResult(dial, sp, morphism, report)


def _translate_dial(sp, pp, p, key_fn, key_inv_fn, *, name):
    """Dial-specific relabeling: payloads (f0, (f1, phi)) <-> (f0, f1, phi),
    where the inner arrow's endpoints are recomputed from context."""
    ops = p.ops

    fibres = {}
    for i in p.base.objects:
        src = sp.fibre(i)
        keys = [key_fn(i, src.object_key(x)) for x in src.objects]

        def make(i, src, keys):
            kid = {k: n for n, k in enumerate(keys)}

            def hom_fn(a, b):
                inner = src.hom(src.id_of_key(key_inv_fn(i, keys[a])),
                                src.id_of_key(key_inv_fn(i, keys[b])))
                return tuple((f.tag[0],) + f.tag[1].tag for f in inner)

            def to_sp(h):
                # fibre arrows are vertical: tag = (f0: I×X -> Y, f1, phi)
                # with (f1, phi) the Prod-fibre arrow over I×X
                dom_i = src.id_of_key(key_inv_fn(i, keys[h.dom]))
                cod_i = src.id_of_key(key_inv_fn(i, keys[h.cod]))
                f0 = h.tag[0]
                (x, u, alpha) = keys[h.dom]
                (y, v, beta) = keys[h.cod]
                pi_i = ops.product(i, x)[1]
                w = ops.pair(pi_i, f0, i, y)
                ix = ops.product(i, x)[0]
                iy = ops.product(i, y)[0]
                dom_inner = pp.fibre(ix).id_of_key((u, alpha))
                tgt_inner = pp.reindex_along(w).ob(pp.fibre(iy).id_of_key((v, beta)))
                inner = LArr(dom_inner, tgt_inner, (h.tag[1], h.tag[2]))
                return LArr(dom_i, cod_i, (f0, inner))

            def compose_fn(g, f):
                res = src.compose(to_sp(g), to_sp(f))
                return (res.tag[0],) + res.tag[1].tag

            def identity_fn(a):
                t = src.identity(src.id_of_key(key_inv_fn(i, keys[a]))).tag
                return (t[0],) + t[1].tag

            cat = LazyCategory(keys, hom_fn, compose_fn, identity_fn,
                               name=f"Dial_{i}",
                               label_fn=lambda k: f"({i},{k[0]},{k[1]},{k[2]})")
            cat._to_sp = to_sp
            return cat

        fibres[i] = make(i, src, keys)

    fwd = {}
    for i in p.base.objects:
        src, tgt = fibres[i], sp.fibre(i)

        def make_f(i, src, tgt):
            def ob(a):
                return tgt.id_of_key(key_inv_fn(i, src.object_key(a)))

            def ar(h):
                return src._to_sp(h)

            return Functor(src, tgt, ob, ar, name=f"dial_iso_{i}")

        fwd[i] = make_f(i, src, tgt)

    def reindex_fn(u):
        a, b = p.base.dom(u), p.base.cod(u)
        inner = sp.reindex_along(u)
        src, tgt = fibres[b], fibres[a]

        def ob(x):
            got = inner.ob(sp.fibre(b).id_of_key(key_inv_fn(b, src.object_key(x))))
            return tgt.id_of_key(key_fn(a, sp.fibre(a).object_key(got)))

        def ar(h):
            res = inner.ar(src._to_sp(h))
            return LArr(ob(h.dom), ob(h.cod), (res.tag[0],) + res.tag[1].tag)

        return Functor(src, tgt, ob, ar)

    dial = IndexedFibration(p.base, p.base_structure, fibres,
                            reindex_fn=reindex_fn, name=name, partial=p.partial)

    def conj(data: AdjunctionData, dA, cA) -> AdjunctionData:
        fdA, fcA = fwd[dA], fwd[cA]
        srcD, srcC = fibres[dA], fibres[cA]
        spD, spC = sp.fibre(dA), sp.fibre(cA)

        def back_ob(cat_from, cat_to, i, x):
            return cat_to.id_of_key(key_fn(i, cat_from.object_key(x)))

        def back_ar(i, h):
            return LArr(back_ob(sp.fibre(i), fibres[i], i, h.dom),
                        back_ob(sp.fibre(i), fibres[i], i, h.cod),
                        (h.tag[0],) + h.tag[1].tag)

        L = Functor(srcD, srcC,
                    lambda x: back_ob(spC, srcC, cA, data.left.ob(fdA.ob(x))),
                    lambda h: back_ar(cA, data.left.ar(fdA.ar(h))))
        R = Functor(srcC, srcD,
                    lambda x: back_ob(spD, srcD, dA, data.right.ob(fcA.ob(x))),
                    lambda h: back_ar(dA, data.right.ar(fcA.ar(h))))
        from .adjunctions import LazyComponents
        unit = LazyComponents(lambda d: back_ar(dA, data.unit[fdA.ob(d)]))
        counit = LazyComponents(lambda c: back_ar(cA, data.counit[fcA.ob(c)]))
        return AdjunctionData(L, R, unit, counit, name=f"dial({data.name})")

    for u, data in sp.coproduct_along.items():
        a, b = p.base.dom(u), p.base.cod(u)
        dial.coproduct_along[u] = conj(data, a, b)
    for u, data in sp.product_along.items():
        # left functor of a simple-product adjunction is the weakening,
        # which runs fibre(cod u) -> fibre(dom u)
        a, b = p.base.dom(u), p.base.cod(u)
        dial.product_along[u] = conj(data, b, a)
    for (j, k), data in sp.coproduct_pair.items():
        jk = ops.product(j, k)[0]
        dial.coproduct_pair[(j, k)] = conj(data, jk, j)
    for (j, k), data in sp.product_pair.items():
        jk = ops.product(j, k)[0]
        dial.product_pair[(j, k)] = conj(data, j, jk)
    morphism = FibrationMorphism(dial, sp, fwd, name="dial->sumprod")
    return dial, morphism


def attach_sum_simple_products(sp: IndexedFibration, *, bound=None):
    """Attach ∏ along every in-range projection of a sum completion (base
    must be cartesian closed on the objects involved)."""
    p = sp.under
    ops = p.ops
    done = {}
    for (j, k), (_jk, pj, _pk) in list(ops.st.products.items()):
        if bound is not None and (j > bound or k > bound):
            continue
        if (j, k) in sp.product_pair:
            continue
        try:
            data = sum_simple_product(sp, j, k)
            sp.product_pair[(j, k)] = data
            sp.product_along.setdefault(pj, data)
            done[(j, k)] = True
        except MissingStructure:
            done[(j, k)] = False
    return done


def dial_direct_compose(dialfib: IndexedFibration, i, g, f):
    """Composition of Dial verticals computed directly from the quadruple
    components (not through the Sum∘Prod transport); used to cross-check the
    transported composition."""
    p = dialfib.dial_of
    base, ops = p.base, p.ops
    fib = dialfib.fibre(i)
    (x, u_, _al) = fib.object_key(f.dom)
    (y, v_, _be) = fib.object_key(f.cod)
    (z, w_, _ga) = fib.object_key(g.cod)
    f0, f1, phi = f.tag
    g0, g1, psi = g.tag
    h0 = base.compose(g0, ops.pair(ops.product(i, x)[1], f0, i, y))
    fac_ixw = [i, x, w_]
    m2 = ops.pairn([ops.projn(fac_ixw, 0),
                    base.compose(f0, ops.pairn([ops.projn(fac_ixw, 0),
                                                ops.projn(fac_ixw, 1)], [i, x])),
                    ops.projn(fac_ixw, 2)], [i, y, w_])
    g1m2 = base.compose(g1, m2)
    m1 = ops.pairn([ops.projn(fac_ixw, 0), ops.projn(fac_ixw, 1), g1m2],
                   [i, x, v_])
    h1 = base.compose(f1, m1)
    inner = p.fibre(ops.prodn(fac_ixw))
    chi = inner.compose(p.star_ar(m2, psi), p.star_ar(m1, phi))
    return (h0, h1, chi)


# ---------------------------------------------------------------------------
# adjoints along coproduct injections (fetch helpers)


def injection_arrow(p: IndexedFibration, a, b, pos=0):
    """The chosen injection j_a: a -> a+b (pos 0) or j_b (pos 1)."""
    c, ja, jb = p.ops.coproduct(a, b)
    return (ja, jb)[pos], c


def p_weak_sigma_inj(p: IndexedFibration, a, b, pos=0) -> WeakAdjunctionData:
    """Right-weakly left adjoint to reindexing along an injection: attached
    weak data first, then attached genuine data, then adjoint search."""
    key = ((a, b), pos)
    got = p.weak_coproduct_along.get(key)
    if got is not None:
        return got
    j, _ = injection_arrow(p, a, b, pos)
    genuine = p.coproduct_along.get(("inj", key))
    if genuine is None:
        genuine = find_adjoint(p, p.reindex_along(j), "left",
                               name=f"sigma_j({a}+{b};{pos})")
        if genuine is None:
            raise MissingStructure(
                f"no (weak) left adjoint along injection {pos} of {a}+{b}")
        p.coproduct_along[("inj", key)] = genuine
    got = as_weak(genuine, "right-weak")
    p.weak_coproduct_along[key] = got
    return got


def p_weak_pi_inj(p: IndexedFibration, a, b, pos=0) -> WeakAdjunctionData:
    """Left-weakly right adjoint to reindexing along an injection."""
    key = ((a, b), pos)
    got = p.weak_product_along.get(key)
    if got is not None:
        return got
    j, _ = injection_arrow(p, a, b, pos)
    genuine = p.product_along.get(("inj", key))
    if genuine is None:
        genuine = find_adjoint(p, p.reindex_along(j), "right",
                               name=f"pi_j({a}+{b};{pos})")
        if genuine is None:
            raise MissingStructure(
                f"no (weak) right adjoint along injection {pos} of {a}+{b}")
        p.product_along[("inj", key)] = genuine
    got = as_weak(genuine, "left-weak")
    p.weak_product_along[key] = got
    return got


def p_sigma_inj(p: IndexedFibration, a, b, pos=0) -> Optional[AdjunctionData]:
    """Genuine left adjoint along an injection, or None."""
    key = ((a, b), pos)
    got = p.coproduct_along.get(("inj", key))
    if got is None:
        j, _ = injection_arrow(p, a, b, pos)
        got = find_adjoint(p, p.reindex_along(j), "left",
                           name=f"sigma_j({a}+{b};{pos})")
        if got is not None:
            p.coproduct_along[("inj", key)] = got
    return got


# ---------------------------------------------------------------------------
# fibred (weak) finite products on a sum completion


@dataclass
class TransportReport:
    """Result of installing transported structure, with its verification."""

    installed: dict = field(default_factory=dict)
    defects: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    strictness: dict = field(default_factory=dict)
    bounded: bool = False

    @property
    def ok(self):
        return not self.defects

    def to_json(self):
        return {"ok": self.ok, "installed": {str(k): str(v) for k, v in self.installed.items()},
                "defects": self.defects[:20], "skipped": self.skipped[:20],
                "strictness": {str(k): v for k, v in self.strictness.items()},
                "bounded": self.bounded}


def _sum_structure(sp, i) -> ChosenStructure:
    st = sp.fibre_structures.get(i)
    if st is None:
        st = ChosenStructure()
        sp.fibre_structures[i] = st
        sp._fibre_ops = {}
    return st


def _bounded_keys(sp, i, bound):
    fib = sp.fibre(i)
    out = []
    for x in fib.objects:
        (c, _al) = fib.object_key(x)
        if bound is None or c <= bound:
            out.append(x)
    return out


def sum_fibred_products(sp: IndexedFibration, *, bound=None) -> TransportReport:
    """Install (I,X,a)×(I,Y,b) = (I, X×Y, <pi_I,pi_X>*a × <pi_I,pi_Y>*b) on
    every fibre of a sum completion and verify the (weak or strict, matching
    the input) universal property plus stability under reindexing."""
    p = sp.under
    base, ops = p.base, p.ops
    rep = TransportReport()
    if bound is None:
        bound = getattr(base, "rank_bound", None)
    base_objs = [i for i in base.objects if bound is None or i <= bound]
    rep.bounded = len(base_objs) < base.n_objects
    cones = {}
    for i in base_objs:
        fib = sp.fibre(i)
        st = _sum_structure(sp, i)
        keys = _bounded_keys(sp, i, bound)
        # terminal: (I, 1, top of the fibre over I)
        one = ops.st.terminal
        pst = p.fibre_structure(i)
        if one is not None and pst is not None and pst.terminal is not None:
            tkey = (one, pst.terminal)
            if sp.fibre(i).has_key(tkey):
                t = fib.id_of_key(tkey)
                st.terminal = t
                term_strict = True
                for z in keys:
                    h = fib.hom(z, t)
                    if len(h) == 0:
                        rep.defects.append({"kind": "terminal", "fibre": i, "at": z})
                        break
                    if len(h) != 1:
                        term_strict = False
                    st.terminal_maps[z] = h[0]
                rep.strictness[("terminal", i)] = "strict" if term_strict else "weak"
        for xi in keys:
            for yi in keys:
                (x, al) = fib.object_key(xi)
                (y, be) = fib.object_key(yi)
                xy = ops.try_product(x, y)
                if xy is None:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": "no base product X×Y"})
                    continue
                try:
                    ixy = ops.prodn([i, x, y])
                except MissingStructure:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": "no base product I×X×Y"})
                    continue
                fac = [i, x, y]
                wx = ops.pairn([ops.projn(fac, 0), ops.projn(fac, 1)], [i, x])
                wy = ops.pairn([ops.projn(fac, 0), ops.projn(fac, 2)], [i, y])
                a2 = p.star(wx, al)
                b2 = p.star(wy, be)
                fst = p.fibre_structure(ixy)
                entry = fst.products.get((a2, b2)) if fst else None
                weak_in = fst is not None and (a2, b2) in fst.weak_products
                if entry is None:
                    from .fibration import _search_product
                    got = _search_product(p.fibre(ixy), a2, b2,
                                          list(p.fibre(ixy).objects))
                    if got is None:
                        rep.skipped.append({"fibre": i, "pair": [x, y],
                                            "reason": "no fibre product"})
                        continue
                    entry = got[:3]
                    weak_in = got[3] == "weak"
                c, pr1, pr2 = entry
                res = fib.id_of_key((xy[0], c))
                proj1 = LArr(res, xi, (ops.projn(fac, 1), pr1))
                proj2 = LArr(res, yi, (ops.projn(fac, 2), pr2))
                strict = not weak_in
                n_bad = 0
                for zi in keys:
                    for f in fib.hom(zi, xi):
                        for g in fib.hom(zi, yi):
                            n = sum(1 for m in fib.hom(zi, res)
                                    if fib.compose(proj1, m) == f
                                    and fib.compose(proj2, m) == g)
                            if strict and n != 1:
                                n_bad += 1
                            if not strict and n < 1:
                                n_bad += 1
                if n_bad:
                    rep.defects.append({"kind": "product-up", "fibre": i,
                                        "pair": [fib.object_key(xi), fib.object_key(yi)],
                                        "bad_cones": n_bad, "strict": strict})
                    continue
                st.products[(xi, yi)] = (res, proj1, proj2)
                if not strict:
                    st.weak_products.add((xi, yi))
                rep.installed[(i, xi, yi)] = fib.object_key(res)
                rep.strictness[(i, xi, yi)] = "strict" if strict else "weak"
                cones.setdefault(i, []).append((xi, yi, res, proj1, proj2, strict))
    # stability under reindexing
    for i in base_objs:
        for j in base_objs:
            for h in base.hom(j, i):
                F = sp.reindex_along(h)
                tgt = sp.fibre(j)
                objs = _bounded_keys(sp, j, bound)
                for (xi, yi, res, pr1, pr2, strict) in cones.get(i, ()):
                    try:
                        cone = (F.ob(res), F.ar(pr1), F.ar(pr2))
                    except MissingStructure as e:
                        rep.skipped.append({"kind": "product-reindex", "fibre": i,
                                            "reason": str(e)})
                        continue
                    ok = is_product_cone(tgt, *cone, weak=not strict, objects=objs)
                    if not ok and strict:
                        ok = is_product_cone(tgt, *cone, weak=True, objects=objs)
                    if not ok:
                        rep.defects.append({"kind": "product-reindex", "fibre": i,
                                            "base_arrow": _arr_json(h),
                                            "pair": [xi, yi]})
    sp._fibre_ops = {}
    return rep


def sum_fibred_coproducts(sp: IndexedFibration, *, bound=None,
                          force_weak=None) -> TransportReport:
    """Install (I,X,a)+(I,Y,b) = (I, X+Y, (theta^{-1})*(∐_{j}a + ∐_{j}b))
    with injections through the units, verify the (weak/strict) property and
    reindex stability through the Beck-Chevalley squares."""
    p = sp.under
    base, ops = p.base, p.ops
    rep = TransportReport()
    if bound is None:
        bound = getattr(base, "rank_bound", None)
    base_objs = [i for i in base.objects if bound is None or i <= bound]
    rep.bounded = len(base_objs) < base.n_objects
    cocones = {}
    for i in base_objs:
        fib = sp.fibre(i)
        st = _sum_structure(sp, i)
        keys = _bounded_keys(sp, i, bound)
        zero = ops.st.initial
        if zero is not None:
            iz = ops.try_product(i, zero)
            if iz is not None:
                pst = p.fibre_structure(iz[0])
                if pst is not None and pst.initial is not None:
                    ikey = (zero, pst.initial)
                    if fib.has_key(ikey):
                        t = fib.id_of_key(ikey)
                        st.initial = t
                        init_strict = True
                        bad = False
                        for z in keys:
                            h = fib.hom(t, z)
                            if len(h) == 0:
                                rep.defects.append({"kind": "initial", "fibre": i,
                                                    "at": z})
                                bad = True
                                break
                            if len(h) != 1:
                                init_strict = False
                            st.initial_maps[z] = h[0]
                        if not bad:
                            rep.strictness[("initial", i)] = \
                                "strict" if init_strict else "weak"
        for xi in keys:
            for yi in keys:
                (x, al) = fib.object_key(xi)
                (y, be) = fib.object_key(yi)
                if ops.try_coproduct(x, y) is None:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": "no base coproduct"})
                    continue
                xy, jx, jy = ops.coproduct(x, y)
                ix = ops.try_product(i, x)
                iy = ops.try_product(i, y)
                if ix is None or iy is None or ops.try_product(i, xy) is None:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": "missing base product"})
                    continue
                if ops.try_coproduct(ix[0], iy[0]) is None:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": "no base coproduct (I×X)+(I×Y)"})
                    continue
                try:
                    theta, theta_inv = ops.theta(i, x, y)
                except MissingStructure as e:
                    rep.skipped.append({"fibre": i, "pair": [x, y],
                                        "reason": str(e)})
                    continue
                c2, j1, j2 = ops.coproduct(ix[0], iy[0])
                use_weak = force_weak
                genuine1 = p_sigma_inj(p, ix[0], iy[0], 0) if not force_weak else None
                genuine2 = p_sigma_inj(p, ix[0], iy[0], 1) if not force_weak else None
                if genuine1 is not None and genuine2 is not None:
                    w1 = as_weak(genuine1, "right-weak")
                    w2 = as_weak(genuine2, "right-weak")
                    use_weak = False
                else:
                    try:
                        w1 = p_weak_sigma_inj(p, ix[0], iy[0], 0)
                        w2 = p_weak_sigma_inj(p, ix[0], iy[0], 1)
                    except MissingStructure as e:
                        rep.skipped.append({"fibre": i, "pair": [x, y],
                                            "reason": str(e)})
                        continue
                    use_weak = True
                push_a = w1.F.ob(al)
                push_b = w2.F.ob(be)
                fst = p.fibre_structure(c2)
                entry = fst.coproducts.get((push_a, push_b)) if fst else None
                weak_fib = fst is not None and (push_a, push_b) in fst.weak_coproducts
                if entry is None:
                    from .fibration import _search_coproduct
                    got = _search_coproduct(p.fibre(c2), push_a, push_b,
                                            list(p.fibre(c2).objects))
                    if got is None:
                        rep.skipped.append({"fibre": i, "pair": [x, y],
                                            "reason": "no fibre coproduct"})
                        continue
                    entry = got[:3]
                    weak_fib = got[3] == "weak"
                chi0, in1, in2 = entry
                chi = p.star(theta_inv, chi0)
                res = fib.id_of_key((xy, chi))
                f1x = base.compose(jx, ix[2])
                f1y = base.compose(jy, iy[2])
                phi_x = p.fibre(ix[0]).compose(p.star_ar(j1, in1), w1.unit(al))
                phi_y = p.fibre(iy[0]).compose(p.star_ar(j2, in2), w2.unit(be))
                inj1 = LArr(xi, res, (f1x, phi_x))
                inj2 = LArr(yi, res, (f1y, phi_y))
                strict = (not use_weak) and (not weak_fib)
                n_bad = 0
                for zi in keys:
                    for f in fib.hom(xi, zi):
                        for g in fib.hom(yi, zi):
                            n = sum(1 for m in fib.hom(res, zi)
                                    if fib.compose(m, inj1) == f
                                    and fib.compose(m, inj2) == g)
                            if strict and n != 1:
                                n_bad += 1
                            if not strict and n < 1:
                                n_bad += 1
                if n_bad:
                    rep.defects.append({"kind": "coproduct-up", "fibre": i,
                                        "pair": [fib.object_key(xi), fib.object_key(yi)],
                                        "bad_cocones": n_bad, "strict": strict})
                    continue
                st.coproducts[(xi, yi)] = (res, inj1, inj2)
                if not strict:
                    st.weak_coproducts.add((xi, yi))
                rep.installed[(i, xi, yi)] = fib.object_key(res)
                rep.strictness[(i, xi, yi)] = "strict" if strict else "weak"
                cocones.setdefault(i, []).append((xi, yi, res, inj1, inj2, strict))
    for i in base_objs:
        for j in base_objs:
            for h in base.hom(j, i):
                F = sp.reindex_along(h)
                tgt = sp.fibre(j)
                objs = _bounded_keys(sp, j, bound)
                for (xi, yi, res, in1, in2, strict) in cocones.get(i, ()):
                    try:
                        cocone = (F.ob(res), F.ar(in1), F.ar(in2))
                    except MissingStructure as e:
                        rep.skipped.append({"kind": "coproduct-reindex", "fibre": i,
                                            "reason": str(e)})
                        continue
                    ok = is_coproduct_cocone(tgt, *cocone, weak=not strict,
                                             objects=objs)
                    if not ok and strict:
                        ok = is_coproduct_cocone(tgt, *cocone, weak=True,
                                                 objects=objs)
                    if not ok:
                        rep.defects.append({"kind": "coproduct-reindex", "fibre": i,
                                            "base_arrow": _arr_json(h),
                                            "pair": [xi, yi]})
    sp._fibre_ops = {}
    return rep


# ---------------------------------------------------------------------------
# one-sided weak adjoints along injections on a sum completion


def _second_leg(p, b_obj, c_obj, a_obj, f1, target):
    """An arrow B×C -> target extending f1: A×C -> target over the A-part:
    f1∘<pt_A !, pi_C> (or the initial map when B×C is initial)."""
    ops = p.ops
    bc = ops.try_product(b_obj, c_obj)
    if bc is None:
        raise MissingStructure(f"no base product {b_obj}×{c_obj}")
    if ops.st.initial is not None and bc[0] == ops.st.initial:
        return ops.initial_map(target)
    pt = ops.point(a_obj)
    e = ops.pair(p.base.compose(pt, ops.terminal_map(bc[0])), bc[2],
                 a_obj, c_obj)
    return p.base.compose(f1, e)


def sum_injection_weak_adjoints(sp: IndexedFibration, a, b):
    """The right-weakly left adjoint and left-weakly right adjoint to the
    j_a-reindexing of a sum completion:

        ∐(A,C,g) = (A+B, C, (theta^{-1})* ∐_{j_{A×C}} g)
        ∏(A,C,g) = (A+B, C, (theta^{-1})* ∏_{j_{A×C}} g)

    with flat/sharp built from the underlying one-sided transposes and the
    base point d-choices.  Returns (right_weak_coprod, left_weak_prod) and
    registers them on sp."""
    p = sp.under
    base, ops = p.base, p.ops
    ab, ja, jb = ops.coproduct(a, b)
    src, tgt = sp.fibre(a), sp.fibre(ab)
    jstar = sp.reindex_along(ja)

    def inj_pair(c_obj):
        ac = ops.product(a, c_obj)[0]
        bc = ops.product(b, c_obj)[0]
        return ac, bc

    def theta_for(c_obj):
        return ops.theta_left(a, b, c_obj)

    def v_prime(c_obj, c2_obj, F1):
        # (A×C)+(B×C) -> (A×C')+(B×C'): theta'^{-1} ∘ <pi, F1> ∘ theta
        th, _ = theta_for(c_obj)
        _, th2_inv = theta_for(c2_obj)
        abc = ops.product(ab, c_obj)[0]
        pi_ab = ops.product(ab, c_obj)[1]
        mid = ops.pair(pi_ab, F1, ab, c2_obj)
        return base.compose(th2_inv, base.compose(mid, th))

    def first_leg(c_obj, c2_obj, f1):
        g2 = _second_leg(p, b, c_obj, a, f1, c2_obj)
        _, th_inv = theta_for(c_obj)
        ac, bc = inj_pair(c_obj)
        return base.compose(ops.copair(f1, g2, ac, bc), th_inv)

    # ---- right-weak left adjoint -----------------------------------------
    def co_ob(d):
        (c_obj, gamma) = src.object_key(d)
        ac, bc = inj_pair(c_obj)
        w = p_weak_sigma_inj(p, ac, bc, 0)
        _, th_inv = theta_for(c_obj)
        return tgt.id_of_key((c_obj, p.star(th_inv, w.F.ob(gamma))))

    def co_ar(h):
        (c_obj, gamma) = src.object_key(h.dom)
        (c2_obj, gamma2) = src.object_key(h.cod)
        f1, phi = h.tag
        ac, bc = inj_pair(c_obj)
        ac2, bc2 = inj_pair(c2_obj)
        w = p_weak_sigma_inj(p, ac, bc, 0)
        w2 = p_weak_sigma_inj(p, ac2, bc2, 0)
        F1 = first_leg(c_obj, c2_obj, f1)
        m = w.F.ar(phi)
        vp = v_prime(c_obj, c2_obj, F1)
        expected = p.star(vp, w2.F.ob(gamma2))
        if p.fibre(ops.coproduct(ac, bc)[0]).cod(m) != expected:
            raise MissingStructure(
                "underlying weak left adjoints along injections violate "
                "Beck-Chevalley on an injection square")
        _, th_inv = theta_for(c_obj)
        return LArr(co_ob(h.dom), co_ob(h.cod), (F1, p.star_ar(th_inv, m)))

    L = Functor(src, tgt, co_ob, co_ar, name=f"coprod_j({a}+{b})[Sum]")

    def co_flat(d, karr):
        (c_obj, gamma) = src.object_key(d)
        (d2_obj, delta) = tgt.object_key(karr.cod)
        f, phi = karr.tag
        ac, bc = inj_pair(c_obj)
        w = p_weak_sigma_inj(p, ac, bc, 0)
        th, _ = theta_for(c_obj)
        jac = ops.coproduct(ac, bc)[1]
        g = base.compose(f, base.compose(th, jac))
        psi = w.flat(gamma, p.star_ar(th, phi))
        return LArr(d, jstar.ob(karr.cod), (g, psi))

    def co_sharp(d, c, garr):
        (c_obj, gamma) = src.object_key(d)
        (d2_obj, delta) = tgt.object_key(c)
        g, psi = garr.tag
        ac, bc = inj_pair(c_obj)
        w = p_weak_sigma_inj(p, ac, bc, 0)
        _, th_inv = theta_for(c_obj)
        g2 = _second_leg(p, b, c_obj, a, g, d2_obj)
        f = base.compose(ops.copair(g, g2, ac, bc), th_inv)
        abc = ops.product(ab, c_obj)[0]
        pi_ab = ops.product(ab, c_obj)[1]
        th, _ = theta_for(c_obj)
        target = p.star(base.compose(ops.pair(pi_ab, f, ab, d2_obj), th), delta)
        m = w.sharp(gamma, target, psi)
        return LArr(co_ob(d), c, (f, p.star_ar(th_inv, m)))

    right_weak = WeakAdjunctionData("right-weak", L, jstar, co_flat, co_sharp,
                                    name=f"coprod_j({a}+{b})[Sum]")

    # ---- left-weak right adjoint ------------------------------------------
    def pr_ob(d):
        (c_obj, gamma) = src.object_key(d)
        ac, bc = inj_pair(c_obj)
        w = p_weak_pi_inj(p, ac, bc, 0)
        _, th_inv = theta_for(c_obj)
        return tgt.id_of_key((c_obj, p.star(th_inv, w.G.ob(gamma))))

    def pr_ar(h):
        (c_obj, gamma) = src.object_key(h.dom)
        (c2_obj, gamma2) = src.object_key(h.cod)
        f1, phi = h.tag
        ac, bc = inj_pair(c_obj)
        ac2, bc2 = inj_pair(c2_obj)
        w = p_weak_pi_inj(p, ac, bc, 0)
        w2 = p_weak_pi_inj(p, ac2, bc2, 0)
        F1 = first_leg(c_obj, c2_obj, f1)
        m = w.G.ar(phi)
        vp = v_prime(c_obj, c2_obj, F1)
        expected = p.star(vp, w2.G.ob(gamma2))
        if p.fibre(ops.coproduct(ac, bc)[0]).cod(m) != expected:
            raise MissingStructure(
                "underlying weak right adjoints along injections violate "
                "Beck-Chevalley on an injection square")
        _, th_inv = theta_for(c_obj)
        return LArr(pr_ob(h.dom), pr_ob(h.cod), (F1, p.star_ar(th_inv, m)))

    R = Functor(src, tgt, pr_ob, pr_ar, name=f"prod_j({a}+{b})[Sum]")

    def pr_flat(d, karr):
        # karr: j*(D,delta) -> (C,gamma) in Sum_a; result (D,delta) -> ∏(C,gamma)
        (d2_obj, delta) = tgt.object_key(d)
        (c_obj, gamma) = src.object_key(karr.cod)
        h, psi = karr.tag
        ad, bd = inj_pair(d2_obj)
        w_d = p_weak_pi_inj(p, ad, bd, 0)
        th_d, th_d_inv = theta_for(d2_obj)
        pi_a = ops.product(a, d2_obj)[1]
        target = p.star(ops.pair(pi_a, h, a, c_obj), gamma)
        psi_flat = w_d.flat(p.star(th_d, delta), psi)
        g2 = _second_leg(p, b, d2_obj, a, h, c_obj)
        F1 = base.compose(ops.copair(h, g2, ad, bd), th_d_inv)
        got = p.fibre(ops.coproduct(ad, bd)[0]).cod(psi_flat)
        ac, bc = inj_pair(c_obj)
        w_c = p_weak_pi_inj(p, ac, bc, 0)
        _, th_c_inv = theta_for(c_obj)
        vp = v_prime(d2_obj, c_obj, F1)
        expected = p.star(vp, w_c.G.ob(gamma))
        if got != expected:
            raise MissingStructure(
                "underlying weak right adjoints along injections violate "
                "Beck-Chevalley on an injection square")
        return LArr(d, pr_ob(karr.cod), (F1, p.star_ar(th_d_inv, psi_flat)))

    def pr_sharp(d, c, garr):
        # garr: (D,delta) -> ∏(C,gamma); result j*(D,delta) -> (C,gamma)
        (d2_obj, delta) = tgt.object_key(d)
        (c_obj, gamma) = src.object_key(c)
        g, phi = garr.tag
        ad, bd = inj_pair(d2_obj)
        ac, bc = inj_pair(c_obj)
        w_d = p_weak_pi_inj(p, ad, bd, 0)
        jad = ops.product(a, d2_obj)
        lead = ops.pair(base.compose(ja, jad[1]), jad[2], ab, d2_obj)
        h = base.compose(g, lead)
        eps = w_d.counit(p.star(ops.pair(jad[1], h, a, c_obj), gamma))
        step = p.star_ar(lead, phi)
        fib_ad = p.fibre(jad[0])
        return LArr(jstar.ob(d), c, (h, fib_ad.compose(eps, step)))

    left_weak = WeakAdjunctionData("left-weak", jstar, R, pr_flat, pr_sharp,
                                   name=f"prod_j({a}+{b})[Sum]")
    sp.weak_coproduct_along[((a, b), 0)] = right_weak
    sp.weak_product_along[((a, b), 0)] = left_weak
    return right_weak, left_weak


# ---------------------------------------------------------------------------
# weak (co)products of the total category


def total_weak_coproduct(sp: IndexedFibration, o1, o2, total=None, bound=None):
    """(I,A,a) + (Y,B,b) = (I+Y, A+B, omega*(∐ a + ∐ b)) in the total
    category of an extendable sum completion, with its injections; the weak
    universal property is checked by exhaustive mediating-arrow existence
    over the (bounded, on virtual bases) cocone targets."""
    from .fibration import TotalCategory
    if bound is None:
        bound = getattr(sp.base, "rank_bound", None)
    p = sp.under
    base, ops = p.base, p.ops
    (i, xi), (y, yi) = o1, o2
    (a_obj, alpha) = sp.fibre(i).object_key(xi)
    (b_obj, beta) = sp.fibre(y).object_key(yi)
    iy, j_i, j_y = ops.coproduct(i, y)
    ab, j_a, j_b = ops.coproduct(a_obj, b_obj)
    om, om_inv, c4, injections = ops.omega(i, y, a_obj, b_obj)
    ia = ops.product(i, a_obj)[0]
    ib = ops.product(i, b_obj)[0]
    ya = ops.product(y, a_obj)[0]
    yb = ops.product(y, b_obj)[0]
    left = ops.coproduct(ia, ib)[0]
    right = ops.coproduct(ya, yb)[0]
    w_alpha = compose_weak(p_weak_sigma_inj(p, left, right, 0),
                           p_weak_sigma_inj(p, ia, ib, 0))
    w_beta = compose_weak(p_weak_sigma_inj(p, left, right, 1),
                          p_weak_sigma_inj(p, ya, yb, 1))
    push_a = w_alpha.F.ob(alpha)
    push_b = w_beta.F.ob(beta)
    fst = p.fibre_structure(c4)
    entry = fst.coproducts.get((push_a, push_b)) if fst else None
    if entry is None:
        from .fibration import _search_coproduct
        got = _search_coproduct(p.fibre(c4), push_a, push_b,
                                list(p.fibre(c4).objects))
        if got is None:
            raise MissingStructure("no fibre coproduct over the four-fold coproduct")
        entry = got[:3]
    chi0, in1, in2 = entry
    chi = p.star(om, chi0)
    res_fib = sp.fibre(iy)
    res = res_fib.id_of_key((ab, chi))
    total = total or TotalCategory(sp)
    res_id = total.obj(iy, res)
    # injections
    f1_a = base.compose(j_a, ops.product(i, a_obj)[2])
    f1_b = base.compose(j_b, ops.product(y, b_obj)[2])
    lead_a = ops.pair(base.compose(j_i, ops.product(i, a_obj)[1]), f1_a, iy, ab)
    lead_b = ops.pair(base.compose(j_y, ops.product(y, b_obj)[1]), f1_b, iy, ab)
    iota_a = injections[0]
    iota_b = injections[3]
    if base.compose(om, lead_a) != iota_a or base.compose(om, lead_b) != iota_b:
        raise MissingStructure("omega does not restrict to the summand injections")
    phi_a = p.fibre(ia).compose(p.star_ar(iota_a, in1), w_alpha.unit(alpha))
    phi_b = p.fibre(yb).compose(p.star_ar(iota_b, in2), w_beta.unit(beta))
    # total-category arrows carry (base leg, vertical part into the reindex)
    v1 = LArr(xi, sp.reindex_along(j_i).ob(res), (f1_a, phi_a))
    v2 = LArr(yi, sp.reindex_along(j_y).ob(res), (f1_b, phi_b))
    inj_1 = LArr(total.obj(i, xi), res_id, (j_i, v1))
    inj_2 = LArr(total.obj(y, yi), res_id, (j_y, v2))
    defects = []
    skipped = 0
    targets = []
    for ti in total.objects:
        (tb, tx) = total.object_key(ti)
        if bound is not None:
            if tb > bound or sp.fibre(tb).object_key(tx)[0] > bound:
                continue
        targets.append(ti)
    for ti in targets:
        try:
            cocones = [(f, g) for f in total.hom(total.obj(i, xi), ti)
                       for g in total.hom(total.obj(y, yi), ti)]
            for f, g in cocones:
                n = sum(1 for m in total.hom(res_id, ti)
                        if total.compose(m, inj_1) == f and total.compose(m, inj_2) == g)
                if n < 1:
                    defects.append({"cocone_at": total.object_key(ti),
                                    "f": _arr_json(f.tag[1]), "g": _arr_json(g.tag[1])})
        except MissingStructure:
            skipped += 1
    out = {"object": (iy, res_fib.object_key(res)), "object_id": res_id,
           "injections": (inj_1, inj_2), "defects": defects,
           "skipped_targets": skipped, "ok": not defects, "total": total,
           "fallback": None}
    if defects:
        # The displayed object can fail weak universality at targets with an
        # empty second component (no base map A+B -> 0 exists although both
        # cocone legs do).  A weak coproduct still exists; find one by
        # exhaustive search so the existence claim stays checkable.
        found = find_weak_coproduct(total, total.obj(i, xi), total.obj(y, yi),
                                    targets=targets)
        if found is not None:
            out["fallback"] = {"object": total.object_key(found[0]),
                               "object_id": found[0]}
            out["ok"] = True
            out["formula_defects"] = defects
            out["defects"] = []
    return out


def find_weak_coproduct(total, o1, o2, targets=None):
    """First object (id order) carrying injections from o1 and o2 through
    which every cocone over the given targets factors."""
    targets = list(total.objects) if targets is None else targets
    cocones = None
    for cand in total.objects:
        for j1 in total.hom(o1, cand):
            for j2 in total.hom(o2, cand):
                if cocones is None:
                    cocones = [(ti, f, g) for ti in targets
                               for f in total.hom(o1, ti)
                               for g in total.hom(o2, ti)]
                ok = True
                for (ti, f, g) in cocones:
                    if not any(total.compose(m, j1) == f
                               and total.compose(m, j2) == g
                               for m in total.hom(cand, ti)):
                        ok = False
                        break
                if ok:
                    return (cand, j1, j2)
    return None


def total_weak_product(sp: IndexedFibration, o1, o2, total=None):
    """Weak products of the total category, through the fibred weak products
    of the completion."""
    from .fibration import total_product
    return total_product(sp, o1, o2, weak=True, total=total)


# ---------------------------------------------------------------------------
# functoriality of Sum on fibration morphisms, and the unit embedding


def sum_of_morphism(m: FibrationMorphism, sp_src: IndexedFibration,
                    sp_tgt: IndexedFibration) -> FibrationMorphism:
    """Sum(F): Sum(q) -> Sum(q') for a base-identity morphism F: q -> q'."""
    p, q = m.source, m.target
    ops = p.ops
    functors = {}
    for i in p.base.objects:
        src, tgt = sp_src.fibre(i), sp_tgt.fibre(i)

        def make(i, src, tgt):
            def ob(x):
                (c, al) = src.object_key(x)
                ic = ops.product(i, c)[0]
                return tgt.id_of_key((c, m.at(ic).ob(al)))

            def ar(h):
                (c, _al) = src.object_key(h.dom)
                ic = ops.product(i, c)[0]
                f1, phi = h.tag
                return LArr(ob(h.dom), ob(h.cod), (f1, m.at(ic).ar(phi)))

            return Functor(src, tgt, ob, ar, name=f"Sum({m.name})_{i}")

        functors[i] = make(i, src, tgt)
    return FibrationMorphism(sp_src, sp_tgt, functors, name=f"Sum({m.name})")


def embed_into_sum(p: IndexedFibration, sp: IndexedFibration) -> FibrationMorphism:
    """The unit p -> Sum(p): alpha over I goes to (I, 1, alpha)."""
    ops = p.ops
    one = ops.terminal()
    functors = {}
    for i in p.base.objects:
        src, tgt = p.fibre(i), sp.fibre(i)

        def make(i, src, tgt):
            bang = ops.terminal_map(i)

            def ob(x):
                return tgt.id_of_key((one, x))

            def ar(h):
                return LArr(ob(src.dom(h)), ob(src.cod(h)), (bang, h))

            return Functor(src, tgt, ob, ar, name=f"eta_{i}")

        functors[i] = make(i, src, tgt)
    return FibrationMorphism(p, sp, functors, name="eta")
