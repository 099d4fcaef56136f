"""Indexed fibrations: totals, cartesian lifts, opposites, fibred structure."""

import pytest

from fibcheck.cat import (Functor, chain_category, check_category_laws,
                          poset_structure)
from fibcheck.errors import SplitViolation
from fibcheck.fibration import (IndexedFibration, TotalCategory, build_total,
                                cartesian_lift, check_cartesian, check_split,
                                fibre_structure_report,
                                fibrations_structurally_equal,
                                opposite_fibration, total_product)
from fibcheck.models import chain_doctrine, s0, sub_finset, triv


def fibration_over_point(fibre_size):
    base = chain_category(1)
    fib = chain_category(fibre_size)
    return IndexedFibration(base, poset_structure(base), {0: fib},
                            reindex={base.identity(0): Functor.identity_functor(fib)},
                            fibre_structures={0: poset_structure(fib)},
                            name="over-point")


def test_total_of_point_fibration_is_the_fibre():
    p = fibration_over_point(2)
    tot = build_total(p)
    assert tot.n_objects == 2
    assert sum(len(tot.hom(a, b)) for a in tot.objects for b in tot.objects) == 3


def test_s0_total_counts(fib_s0):
    tot = build_total(fib_s0)
    assert tot.n_objects == 3
    n_arrows = sum(len(tot.hom(a, b)) for a in tot.objects for b in tot.objects)
    assert n_arrows == 6  # 3 identities, u->v, and one arrow from each of u,v


def test_triv_total_is_base():
    p = triv("c2")
    tot = build_total(p)
    assert tot.n_objects == 2
    assert check_category_laws(tot).ok
    counts = sorted(len(tot.hom(a, b)) for a in tot.objects for b in tot.objects)
    assert counts == [0, 1, 1, 1]   # same hom profile as the 2-chain


def test_split_violation_detected():
    base = chain_category(2)
    fib = chain_category(2)
    bad_id = Functor(fib, fib, lambda x: 1 - x, lambda h: fib.identity(1 - fib.dom(h))
                     if fib.dom(h) == fib.cod(h) else fib.arrow_of_pair[(0, 1)])

    def reindex_fn(u):
        if base.dom(u) == base.cod(u) and base.dom(u) == 0:
            return bad_id
        src = fib
        return Functor.identity_functor(src)

    p = IndexedFibration(base, poset_structure(base), {0: fib, 1: fib},
                         reindex_fn=reindex_fn)
    rep = check_split(p)
    assert not rep.ok
    assert any(v["kind"] == "reindex-identity" for v in rep.violations)
    with pytest.raises(SplitViolation):
        build_total(p)


def test_cartesian_lift_identity(fib_s0):
    tot = build_total(fib_s0)
    u = fib_s0.base.identity(1)
    lift = cartesian_lift(fib_s0, u, 1, tot)
    assert tot.is_identity(lift)


def test_cartesian_lift_factorization(fib_s0):
    tot = build_total(fib_s0)
    up = fib_s0.base.arrow_of_pair[(0, 1)]
    for y in fib_s0.fibre(1).objects:
        lift = cartesian_lift(fib_s0, up, y, tot)
        rep = check_cartesian(tot, lift)
        assert rep.ok
        assert rep.checked["factorization_instances"] > 0


def test_opposite_involution_structural(fib_s0):
    q = opposite_fibration(opposite_fibration(fib_s0))
    assert q is fib_s0
    assert fibrations_structurally_equal(q, fib_s0)


def test_opposite_reverses_fibre(fib_s0):
    q = opposite_fibration(fib_s0)
    fib = q.fibre(1)
    assert len(fib.hom(1, 0)) == 1 and len(fib.hom(0, 1)) == 0


def test_opposite_swaps_fibred_structure(fib_s0):
    rep = fibre_structure_report(fib_s0)
    rep_op = fibre_structure_report(opposite_fibration(fib_s0))
    assert rep.fibred("products") == rep_op.fibred("coproducts")
    assert rep.fibred("coproducts") == rep_op.fibred("products")


def test_fibre_report_s0(fib_s0):
    rep = fibre_structure_report(fib_s0)
    assert rep.fibred("products", weak_ok=False)
    assert rep.fibred("coproducts", weak_ok=False)


def test_fibre_report_sub_finset(sub2):
    rep = fibre_structure_report(sub2, bound=2)
    assert rep.fibred("products") and rep.fibred("coproducts")
    assert rep.bounded


def test_fibre_report_discrete_has_no_products():
    from fibcheck.models import discrete_fibration
    p = discrete_fibration("c2", [2, 2])
    rep = fibre_structure_report(p)
    assert rep.per_fibre[0]["products"].exists == "none"
    assert rep.per_fibre[0]["products"].counterexample is not None


def test_total_product_triv():
    p = triv("c2")
    tot = TotalCategory(p)
    res = total_product(p, (1, 0), (1, 0), total=tot)
    assert res["ok"] and res["object"][0] == 1


def test_total_product_s0_meet(fib_s0):
    tot = TotalCategory(fib_s0)
    res = total_product(fib_s0, (1, 0), (1, 1), total=tot)
    assert res["ok"]
    assert res["object"] == (1, 0)       # u ∧ v = u


def test_total_product_sub_finset_singleton(sub2):
    # (2,{0}) × (2,{1}) = (4, {(0,1)}): row-major element 1, mask 2
    tot = TotalCategory(sub2)
    res = total_product(sub2, (2, 0b01), (2, 0b10), total=tot)
    assert res["ok"]
    assert res["object"] == (4, 1 << 1)
    proj = res["projections"][0]
    assert tot.projection_arrow(proj) == sub2.ops.product(2, 2)[1]


def test_structural_equality_of_rebuilt_model():
    assert fibrations_structurally_equal(chain_doctrine([1, 2]),
                                         chain_doctrine([1, 2]))
    assert not fibrations_structurally_equal(chain_doctrine([1, 2]),
                                             chain_doctrine([2, 2]))
