"""Quantifier-free analysis, classification, prenex, Skolemization,
free-algebra recognition."""

import pytest

from fibcheck.cat import iso_search
from fibcheck.completions import (dial_completion, prod_completion,
                                  sum_completion)
from fibcheck.errors import NotGoedel
from fibcheck.fibration import check_fibrewise_equivalence
from fibcheck.models import (chain_doctrine, random_fibration, s0, sub_finset,
                             sum_free, triv)
from fibcheck.qf import (QfAnalysis, classify_fibration,
                         embed_into_recognized, factor_fibre_arrow, is_qf,
                         prenex_decompose, recognize_dialectica,
                         reconstruct_from_qf, verify_skolemization)


def qf_iso_characterization(p, sp):
    """Independent characterization: x is sigma-qf in Sum(p) iff x is
    isomorphic to some (I, 1, gamma)."""
    one = p.ops.terminal()
    an = QfAnalysis(sp)
    for i in p.base.objects:
        fib = sp.fibre(i)
        for x in fib.objects:
            verdict = an.is_qf("sigma", i, x).verdict
            has_iso = any(
                iso_search(fib, x, fib.id_of_key((one, g))) is not None
                for g in p.fibre(p.ops.product(i, one)[0]).objects)
            assert verdict == has_iso, (p.name, i, fib.object_key(x))


def test_unit_objects_are_qf(fib_s0):
    sp = sum_completion(fib_s0)
    one = fib_s0.ops.terminal()
    for i in fib_s0.base.objects:
        for g in fib_s0.fibre(i).objects:
            x = sp.fibre(i).id_of_key((one, g))
            assert is_qf(sp, "sigma", i, x).verdict


def test_qf_characterization_sum_s0(fib_s0):
    qf_iso_characterization(fib_s0, sum_completion(fib_s0))


def test_qf_characterization_sum_random():
    for seed in (0, 3, 11):
        p = random_fibration(seed, 2, 3)
        qf_iso_characterization(p, sum_completion(p))


def test_empty_subset_not_qf(sub2):
    cert = is_qf(sub2, "sigma", 2, 0, bound=2)
    assert not cert.verdict
    assert cert.failure is not None
    # the certificate replays: rebuild the failing instance
    a, b = cert.failure["A"], cert.failure["B"]
    from fibcheck.completions import p_sigma
    data = p_sigma(sub2, a, b)
    f = cert.failure["f"]
    falpha = sub2.star(f, 0)
    qbeta = data.left.ob(cert.failure["beta"])
    h = cert.failure["h"]
    assert h in sub2.fibre(a).hom(falpha, qbeta)


def test_qf_stable_under_reindexing(fib_s0):
    sp = sum_completion(fib_s0)
    an = QfAnalysis(sp)
    for i in fib_s0.base.objects:
        for j in fib_s0.base.objects:
            for u in fib_s0.base.hom(i, j):
                F = sp.reindex_along(u)
                for x in an.qf_objects("sigma", j):
                    assert an.is_qf("sigma", i, F.ob(x)).verdict


def test_enough_qf_sum_always(fib_s0):
    sp = sum_completion(fib_s0)
    rep = QfAnalysis(sp).enough("sigma")
    assert rep.verdict
    assert len(rep.witnesses) == sum(sp.fibre(i).n_objects
                                     for i in fib_s0.base.objects)


def test_enough_qf_triv_degenerate():
    rep = QfAnalysis(triv("c2")).enough("sigma")
    assert rep.verdict


def test_enough_qf_fails_for_sub_finset(sub2):
    rep = QfAnalysis(sub2, bound=2).enough("sigma")
    assert not rep.verdict
    assert rep.counterexample is not None


# ---------------------------------------------------------------------------
# factorization


def test_factor_identity_and_all_arrows(fib_s0):
    sp = sum_completion(fib_s0)
    for i in fib_s0.base.objects:
        fib = sp.fibre(i)
        for a in fib.objects:
            for b in fib.objects:
                for h in fib.hom(a, b):
                    res = factor_fibre_arrow(sp, i, h)
                    assert res.matches_input


def test_factor_unit_arrow(fib_s0):
    sp = sum_completion(fib_s0)
    from fibcheck.completions import p_sigma
    data = p_sigma(sp, 1, 1)
    for x in sp.fibre(fib_ia := fib_s0.ops.product(1, 1)[0]).objects:
        eta = data.unit[x]
        res = factor_fibre_arrow(sp, fib_ia, eta)
        assert res.matches_input


# ---------------------------------------------------------------------------
# classification


def test_classify_triv_one_all_degenerate():
    rep = classify_fibration(triv("one"))
    assert rep.skolem and rep.goedel and rep.extendable


def test_classify_dial_is_goedel(fib_s0):
    rep = classify_fibration(dial_completion(fib_s0).fibration)
    assert rep.base_ccc and rep.skolem and rep.goedel


def test_classify_sub_finset_extendable_not_goedel(sub2):
    rep = classify_fibration(sub2, bound=2)
    assert rep.extendable
    assert not rep.goedel
    assert not rep.enough_sigma_qf.verdict


def test_sum_preserves_extendability(sub2):
    """If p is extendable then Sum(p) is, with the transported witnesses."""
    from fibcheck.completions import (sum_fibred_coproducts,
                                      sum_fibred_products,
                                      sum_injection_weak_adjoints)
    sp = sum_completion(sub2)
    assert sum_fibred_products(sp, bound=1).ok
    assert sum_fibred_coproducts(sp, bound=1).ok
    rw, lw = sum_injection_weak_adjoints(sp, 1, 1)
    d_objs = [o for o in sp.fibre(1).objects
              if sp.fibre(1).object_key(o)[0] <= 1]
    c_objs = [o for o in sp.fibre(2).objects
              if sp.fibre(2).object_key(o)[0] <= 1]
    from fibcheck.adjunctions import verify_weak_adjunction
    assert verify_weak_adjunction(rw, d_objects=d_objs, c_objects=c_objs).ok
    assert verify_weak_adjunction(lw, d_objects=c_objs, c_objects=d_objs).ok


# ---------------------------------------------------------------------------
# prenex and Skolemization


def test_prenex_every_object(fib_s0):
    d = dial_completion(fib_s0).fibration
    rep = classify_fibration(d)
    for i in d.base.objects:
        for alpha in d.fibre(i).objects:
            res = prenex_decompose(d, i, alpha, report=rep)
            assert all(res.checks.values()), res.checks


def test_prenex_requires_goedel(sub2):
    with pytest.raises(NotGoedel):
        prenex_decompose(sub2, 1, 0, report=classify_fibration(sub2, bound=2))


def test_prenex_over_point():
    p = chain_doctrine([2])
    d = dial_completion(p).fibration
    rep = classify_fibration(d)
    for alpha in d.fibre(0).objects:
        res = prenex_decompose(d, 0, alpha, report=rep)
        assert all(res.checks.values())


def skolem_instances(dq):
    for a1 in dq.base.objects:
        for a2 in dq.base.objects:
            for b in dq.base.objects:
                try:
                    fibre_obj = dq.ops.prodn([a1, a2, b])
                except Exception:
                    continue
                for alpha in dq.fibre(fibre_obj).objects:
                    yield a1, a2, b, alpha


def test_skolemization_dial_triv_c2():
    dq = dial_completion(triv("c2")).fibration
    for a1, a2, b, alpha in skolem_instances(dq):
        rep = verify_skolemization(dq, a1, a2, b, alpha)
        assert rep.ok
        e = dq.ops.exponential(a2, b)[0]
        assert rep.bcc_pullbacks_checked == len(dq.base.hom(a1, e))


def test_skolemization_dial_s0(fib_s0):
    dq = dial_completion(fib_s0).fibration
    results = [verify_skolemization(dq, *inst) for inst in skolem_instances(dq)]
    assert results and all(r.ok for r in results)


def test_skolemization_trivial_when_a2_terminal(fib_s0):
    dq = dial_completion(fib_s0).fibration
    # A2 = 1 is the terminal object of c2
    for alpha in dq.fibre(1).objects:
        rep = verify_skolemization(dq, 1, 1, 1, alpha)
        assert rep.ok


# ---------------------------------------------------------------------------
# recognition


def test_reconstruct_sum_is_equivalence(fib_s0):
    sp = sum_completion(fib_s0)
    sub, F, rep = reconstruct_from_qf(sp, "sigma")
    assert rep.ok
    # hom counts match exactly fibrewise
    for i, counts in rep.hom_counts.items():
        for (_x, _y, n_src, n_tgt) in counts:
            assert n_src == n_tgt


def test_reconstruct_all_qf_fibration():
    sf = sum_free("c2", [1, 2])
    sub, F, rep = reconstruct_from_qf(sf, "sigma")
    assert rep.ok


def test_reconstruct_pi_side_via_duality(fib_s0):
    pp = prod_completion(fib_s0, compare_duality=False)
    sub, F, rep = reconstruct_from_qf(pp, "pi")
    assert rep.ok


def test_recognize_round_trip(fib_s0):
    dr = dial_completion(fib_s0)
    res = recognize_dialectica(dr.fibration)
    assert res.ok
    emb = embed_into_recognized(fib_s0, res, dr.fibration)
    assert check_fibrewise_equivalence(emb).ok
    assert emb.check().ok


def test_recognize_blocked(sub2):
    res = recognize_dialectica(sub2, bound=2)
    assert not res.ok
    assert res.blocked_by is not None
    assert res.blocked_by["goedel"] is False


def test_recognize_triv_one_degenerate():
    res = recognize_dialectica(triv("one"))
    assert res.ok
