"""Sum, Prod, Dial completions and the structure they transport."""

import pytest

from fibcheck.adjunctions import verify_adjunction, verify_weak_adjunction
from fibcheck.cat import check_category_laws, iso_search
from fibcheck.completions import (attach_sum_simple_products, dial_completion,
                                  dial_direct_compose, embed_into_sum,
                                  p_sigma, prod_completion, sum_completion,
                                  sum_fibred_coproducts, sum_fibred_products,
                                  sum_injection_weak_adjoints,
                                  sum_simple_coproduct, sum_simple_product,
                                  total_weak_coproduct, total_weak_product)
from fibcheck.errors import MissingStructure
from fibcheck.fibration import check_split, TotalCategory
from fibcheck.models import (chain_doctrine, discrete_fibration, s0,
                             sub_finset, triv)


# ---------------------------------------------------------------------------
# Sum


def test_sum_over_point_base():
    base_fib = chain_doctrine([2])
    sp = sum_completion(base_fib)
    keys = [sp.fibre(0).object_key(x) for x in sp.fibre(0).objects]
    assert keys == [(0, 0), (0, 1)]


def test_sum_s0_cardinality(fib_s0):
    sp = sum_completion(fib_s0)
    assert sp.fibre(1).n_objects == 3     # |E_0| + |E_1| = 1 + 2
    assert sp.fibre(0).n_objects == 2
    assert check_split(sp).ok


def test_sum_reindex_formula(fib_s0):
    sp = sum_completion(fib_s0)
    up = fib_s0.base.arrow_of_pair[(0, 1)]
    F = sp.reindex_along(up)
    src_id = sp.fibre(1).id_of_key((1, 1))       # (1, 1, v)
    assert sp.fibre(0).object_key(F.ob(src_id)) == (1, 0)   # (0, 1, bottom)


def test_sum_fibre_laws(fib_s0):
    sp = sum_completion(fib_s0)
    for i in (0, 1):
        assert check_category_laws(sp.fibre(i)).ok


def test_sum_simple_coproduct_formula_and_adjunction(fib_s0):
    sp = sum_completion(fib_s0)
    data = sum_simple_coproduct(sp, 1, 1)
    # coprod_{pi_J}(J×K, Y, beta) = (J, K×Y, beta)
    src = sp.fibre(1)
    for x in src.objects:
        (y, be) = src.object_key(x)
        ky = fib_ky = fib_s0.ops.product(1, y)[0]
        assert sp.fibre(1).object_key(data.left.ob(x))[1] == be
    assert verify_adjunction(data).ok


def test_every_triple_is_a_coproduct_on_the_nose(fib_s0):
    sp = sum_completion(fib_s0)
    one = fib_s0.ops.terminal()
    for i in fib_s0.base.objects:
        fib = sp.fibre(i)
        for x in fib.objects:
            (a_obj, alpha) = fib.object_key(x)
            data = p_sigma(sp, i, a_obj)
            ia = fib_s0.ops.product(i, a_obj)[0]
            src_id = sp.fibre(ia).id_of_key((one, alpha))
            assert data.left.ob(src_id) == x


def test_sum_simple_product_verifies(fib_s0):
    pp = prod_completion(fib_s0, compare_duality=False)
    sp = sum_completion(pp)
    done = attach_sum_simple_products(sp)
    assert all(done.values())
    for data in sp.product_pair.values():
        assert verify_adjunction(data).ok


def test_sum_simple_product_A2_terminal_is_identity_up_to_iso(fib_s0):
    pp = prod_completion(fib_s0, compare_duality=False)
    sp = sum_completion(pp)
    data = sum_simple_product(sp, 1, 1)   # A2 = 1 is terminal in c2
    fib = sp.fibre(1)
    for x in fib.objects:
        assert iso_search(fib, x, data.right.ob(x)) is not None


# ---------------------------------------------------------------------------
# Prod


def test_prod_cardinality_and_duality(fib_s0):
    pp = prod_completion(fib_s0)
    assert pp.fibre(1).n_objects == 3
    assert pp.duality_report.ok
    assert check_split(pp).ok


def test_prod_morphism_direction(fib_s0):
    pp = prod_completion(fib_s0, compare_duality=False)
    fib = pp.fibre(1)
    v = fib.id_of_key((1, 1))
    u = fib.id_of_key((1, 0))
    assert len(fib.hom(v, u)) == 0      # no proof of forall x v -> forall x u
    assert len(fib.hom(u, v)) == 1


def test_prod_triv_hom_counts():
    # with terminal fibres, |hom((X,·),(Y,·))| over I is |hom_base(I×Y, X)|
    p = triv("c2")
    pp = prod_completion(p, compare_duality=False)
    fib = pp.fibre(1)
    for a in fib.objects:
        for b in fib.objects:
            (x, _) = fib.object_key(a)
            (y, _) = fib.object_key(b)
            iy = p.ops.product(1, y)[0]
            assert len(fib.hom(a, b)) == len(p.base.hom(iy, x))


# ---------------------------------------------------------------------------
# Dial


def test_dial_cardinalities(fib_s0):
    dr = dial_completion(fib_s0)
    assert dr.fibration.fibre(1).n_objects == 5   # 1+1+1+2
    assert dr.fibration.fibre(0).n_objects == 4
    assert dr.iso_report.ok
    assert check_split(dr.fibration).ok


def test_dial_over_point_collapses():
    p = chain_doctrine([2])
    dr = dial_completion(p)
    fib = dr.fibration.fibre(0)
    assert fib.n_objects == 2
    # the fibre is equivalent to the original chain fibre
    assert len(fib.hom(0, 1)) + len(fib.hom(1, 0)) == 1


def test_dial_morphism_component_typing(fib_s0):
    dr = dial_completion(fib_s0)
    d = dr.fibration
    base, ops = fib_s0.base, fib_s0.ops
    fib = d.fibre(1)
    for a in fib.objects:
        for b in fib.objects:
            (x, u_, _al) = fib.object_key(a)
            (y, v_, _be) = fib.object_key(b)
            for h in fib.hom(a, b):
                f0, f1, _phi = h.tag
                assert base.dom(f0) == ops.product(1, x)[0] and base.cod(f0) == y
                assert base.dom(f1) == ops.prodn([1, x, v_]) and base.cod(f1) == u_


def test_dial_transported_composition_matches_direct(fib_s0):
    dr = dial_completion(fib_s0)
    d = dr.fibration
    for i in fib_s0.base.objects:
        fib = d.fibre(i)
        for a in fib.objects:
            for b in fib.objects:
                for f in fib.hom(a, b):
                    for c in fib.objects:
                        for g in fib.hom(b, c):
                            assert dial_direct_compose(d, i, g, f) == \
                                fib.compose(g, f).tag


def test_dial_sub_finset_iso_bounded(sub2):
    dr = dial_completion(sub2)
    assert dr.iso_report.ok
    assert dr.iso_report.bounded


# ---------------------------------------------------------------------------
# fibred structure transport on Sum


def test_sum_fibred_products_s0(fib_s0):
    sp = sum_completion(fib_s0)
    rep = sum_fibred_products(sp)
    assert rep.ok
    # terminal is (I, 1, top)
    st = sp.fibre_structures[1]
    assert sp.fibre(1).object_key(st.terminal) == (1, 1)
    # all strict: chains have strict meets
    assert all(v == "strict" for v in rep.strictness.values())


def test_sum_fibred_products_subset_oracle(sub2):
    sp = sum_completion(sub2)
    rep = sum_fibred_products(sp, bound=2)
    assert rep.ok
    fib1 = sp.fibre(1)
    x = fib1.id_of_key((2, 0b01))
    y = fib1.id_of_key((2, 0b10))
    res, _, _ = sp.fibre_structures[1].products[(x, y)]
    # (1,2,{0}) × (1,2,{1}) = (1,4, pullback intersection over 2×2)
    assert fib1.object_key(res) == (4, 1 << 1)


def test_sum_fibred_coproducts_s0(fib_s0):
    sp = sum_completion(fib_s0)
    rep = sum_fibred_coproducts(sp)
    assert rep.ok


def test_sum_fibred_coproducts_subset_oracle(sub2):
    sp = sum_completion(sub2)
    rep = sum_fibred_coproducts(sp, bound=2)
    assert rep.ok
    fib1 = sp.fibre(1)
    x = fib1.id_of_key((1, 1))    # (1,1,{*})
    y = fib1.id_of_key((1, 0))    # (1,1,∅)
    res, in1, in2 = sp.fibre_structures[1].coproducts[(x, y)]
    assert fib1.object_key(res) == (2, 0b01)
    # the injections' first components equal j_X pi_X after theta transport
    base, ops = sub2.base, sub2.ops
    _, jx, jy = ops.coproduct(1, 1)
    assert in1.tag[0] == base.compose(jx, ops.product(1, 1)[2])
    assert in2.tag[0] == base.compose(jy, ops.product(1, 1)[2])


def test_zero_coproduct_is_identity_up_to_iso(fib_s0):
    sp = sum_completion(fib_s0)
    sum_fibred_coproducts(sp)
    fib = sp.fibre(1)
    zero_obj = sp.fibre_structures[1].initial
    x = fib.id_of_key((1, 1))
    res, _, _ = sp.fibre_structures[1].coproducts[(zero_obj, x)]
    assert iso_search(fib, res, x) is not None


# ---------------------------------------------------------------------------
# injection weak adjoints and total (co)products


def test_injection_weak_adjoints_subset_oracles(sub2):
    sp = sum_completion(sub2)
    rw, lw = sum_injection_weak_adjoints(sp, 1, 1)
    g0 = sp.fibre(1).id_of_key((1, 1))           # (1, 1, {*})
    assert sp.fibre(2).object_key(rw.F.ob(g0)) == (1, 0b01)    # {0} ⊆ 2
    assert sp.fibre(2).object_key(lw.G.ob(g0)) == (1, 0b11)    # {0,1} ⊆ 2
    d_objs = [o for o in sp.fibre(1).objects
              if sp.fibre(1).object_key(o)[0] <= 2]
    c_objs = [o for o in sp.fibre(2).objects
              if sp.fibre(2).object_key(o)[0] <= 2]
    assert verify_weak_adjunction(rw, d_objects=d_objs, c_objects=c_objs).ok
    assert verify_weak_adjunction(lw, d_objects=c_objs, c_objects=d_objs).ok


def test_injection_weak_adjoints_b_zero_identity_transport(fib_s0):
    sp = sum_completion(fib_s0)
    rw, lw = sum_injection_weak_adjoints(sp, 1, 0)
    fib = sp.fibre(1)
    for x in fib.objects:
        assert iso_search(fib, x, rw.F.ob(x)) is not None
        assert iso_search(fib, x, lw.G.ob(x)) is not None


def test_total_weak_coproduct_oracle(sub2):
    sp = sum_completion(sub2)
    x = sp.fibre(1).id_of_key((1, 1))
    res = total_weak_coproduct(sp, (1, x), (1, x))
    assert res["ok"]
    # over base 1+1 = 2, second component 1+1 = 2; fibre datum over 2×2 is
    # {(0, inj_A 0), (1, inj_B 0)} = {(0,0), (1,1)} = row-major {0, 3}
    assert res["object"] == (2, (2, 0b1001))
    inj1, inj2 = res["injections"]
    total = res["total"]
    assert total.projection_arrow(inj1) == sub2.ops.coproduct(1, 1)[1]
    assert total.projection_arrow(inj2) == sub2.ops.coproduct(1, 1)[2]


def test_total_weak_product_via_fibred_products(sub2):
    sp = sum_completion(sub2)
    sum_fibred_products(sp, bound=2)
    x = sp.fibre(1).id_of_key((1, 1))
    res = total_weak_product(sp, (1, x), (1, x))
    assert res["ok"]
    assert res["object"][0] == 1   # projects to the chosen base product


def test_sum_completion_needs_base_products():
    from fibcheck.cat import ChosenStructure, chain_category, Functor
    from fibcheck.fibration import IndexedFibration
    base = chain_category(2)
    fib = chain_category(1)
    p = IndexedFibration(base, ChosenStructure(), {0: fib, 1: fib},
                         reindex_fn=lambda u: Functor.identity_functor(fib))
    with pytest.raises(MissingStructure):
        sum_completion(p)


def test_embedding_unit(fib_s0):
    sp = sum_completion(fib_s0)
    eta = embed_into_sum(fib_s0, sp)
    assert eta.check().ok
    one = fib_s0.ops.terminal()
    for i in fib_s0.base.objects:
        for x in fib_s0.fibre(i).objects:
            assert sp.fibre(i).object_key(eta.at(i).ob(x)) == (one, x)
