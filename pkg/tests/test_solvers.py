import itertools
import random

import numpy as np
import pytest
from helpers import random_system

from vclab import catalog
from vclab import construction as cons
from vclab.errors import BudgetExceeded
from vclab.solvers import (
    Certificate, _Search, backtracking_solve, certify_not_algebraically_closed, curated_words,
    enumerate_solve, eval_system, group_exponent, solution_transfer, transfer_batch, value_set,
    verbal_closedness_audit, verify_certificate,
)
from vclab.words import Coef, MixedWord, Var, commutator, evaluate, parse_word, power, word


# -- evaluation ---------------------------------------------------------------------

def test_identity_assignment_fails_tag3(q8_spec):
    sys_ = cons.build_equation_system(q8_spec)
    res = eval_system(sys_, q8_spec.H, [0] * sys_.nvars)
    for ok, tag in zip(res, sys_.tags):
        if tag == 3:
            assert not ok
        else:
            assert ok


def test_eval_system_matches_evaluate(q8_spec):
    rng = random.Random(2)
    sys_ = cons.build_equation_system(q8_spec)
    H = q8_spec.H
    for _ in range(20):
        a = [rng.randrange(8) for _ in range(sys_.nvars)]
        expect = [evaluate(w, H, a) == 0 for w in sys_.equations]
        assert eval_system(sys_, H, a) == expect


def test_eval_system_missing_variable(q8):
    with pytest.raises(KeyError):
        eval_system([parse_word("x y")], q8, [0])


# -- backtracking -------------------------------------------------------------------

def test_solve_squares_in_z4():
    Z = catalog.get("z4")
    res = backtracking_solve([power(0, 2)], Z)
    assert res.status == "sat" and res.solution == [0] and res.exhausted
    assert res.domain_sizes == [2]


def test_solve_centralizer_in_s3(s3):
    t = s3.index_of("(1 2)")
    w = word(Var(0, -1), Coef(s3.inv(t)), Var(0), Coef(t), H=s3)
    sols = [x for x in range(6) if evaluate(w, s3, [x]) == 0]
    assert sols == [0, t]
    res = backtracking_solve([w], s3)
    assert res.domain_sizes == [2]


def test_unsat_constant_equation(q8):
    res = backtracking_solve([MixedWord((Coef(1),), 1)], q8, nvars=1)
    assert res.status == "unsat"


def test_budget_is_distinct_from_unsat(q8_spec):
    sys_ = cons.build_equation_system(q8_spec)
    res = backtracking_solve(sys_, q8_spec.H, budget=10)
    assert res.status == "budget" and not res.exhausted and res.solution is None
    with pytest.raises(BudgetExceeded):
        certify_not_algebraically_closed(q8_spec, budget=10)


@pytest.mark.parametrize("seed", range(40))
def test_cross_validation(seed):
    H, nvars, eqs = random_system(random.Random(seed))
    res = backtracking_solve(eqs, H, nvars=nvars)
    brute = enumerate_solve(eqs, H, nvars)
    assert res.exhausted
    assert res.solution == brute
    if res.solution is not None:
        assert all(eval_system(eqs, H, res.solution))


@pytest.mark.parametrize("seed", range(20))
def test_propagation_keeps_every_solution(seed):
    H, nvars, eqs = random_system(random.Random(100 + seed))
    domains = _Search(eqs, nvars, H, 10 ** 6).propagate_unary()
    for a in itertools.product(range(H.order), repeat=nvars):
        if all(evaluate(w, H, a) == 0 for w in eqs):
            assert domains is not None
            assert all(x in d for x, d in zip(a, domains))


# -- certificates -----------------------------------------------------------------------

@pytest.mark.parametrize("spec_name", ["q8_spec", "d4_spec"])
def test_certificate_issued(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    cert = certify_not_algebraically_closed(spec)
    assert cert.issued
    assert cert.system_counts == {"total": 58, "1": 4, "2": 24, "3": 2, "4": 24, "5": 4}
    assert cert.h_unsat["status"] == "unsat" and cert.h_unsat["exhausted"]
    d = cert.to_dict()
    assert Certificate.from_dict(d).to_dict() == d
    assert verify_certificate(d).ok


def test_tampered_certificate_detected(q8_spec):
    d = certify_not_algebraically_closed(q8_spec).to_dict()
    d["g_solution"][0]["comps"] = [2, 0, 0]
    res = verify_certificate(d)
    assert not res.ok and not all(res.residuals_ok)
    d = certify_not_algebraically_closed(q8_spec).to_dict()
    d["h_unsat"]["exhausted"] = False
    assert not verify_certificate(d).ok


def test_system_is_satisfiable_in_g_but_brute_force_agrees_in_h(q8_spec):
    # the UNSAT claim, re-derived without the MRV pass
    sys_ = cons.build_equation_system(q8_spec)
    res = backtracking_solve(sys_, q8_spec.H, canonical=False)
    assert res.status == "unsat"


# -- solution transfer ------------------------------------------------------------------

def test_transfer_identity_pipeline(q8_spec):
    for h in range(8):
        assert solution_transfer(q8_spec, word(Var(0)), h, [cons.diag(q8_spec, h)]) == [h]


def test_transfer_square(q8_spec, q8):
    i, m1 = q8.index_of("i"), q8.index_of("-1")
    assert solution_transfer(q8_spec, power(0, 2), m1, [cons.diag(q8_spec, i)]) == [i]


def test_transfer_nondiagonal_square(q8_spec, q8):
    s = q8_spec
    m1 = q8.index_of("-1")
    B = cons.GBatch(s)
    elems = B.all_elements()
    sq = B.mul(elems, elems)
    hits = np.flatnonzero(B.diagonal_mask(sq) & (sq[1][:, 0] == m1) & (elems[0] != 0))
    assert len(hits)
    for i in hits[:50]:
        x = B.element(elems, int(i))
        (h,) = solution_transfer(s, power(0, 2), m1, [x])
        assert q8.pow(h, 2) == m1


def test_transfer_rejects_non_solution(q8_spec):
    with pytest.raises(ValueError):
        solution_transfer(q8_spec, power(0, 2), 1, [cons.diag(q8_spec, 0)])


def test_transfer_batch_matches_scalar(q8_spec):
    s = q8_spec
    B = cons.GBatch(s)
    rng = np.random.default_rng(3)
    w = parse_word("x^2 y^-2")
    X = B.decode(rng.integers(0, s.group_order, 20000))
    Y = B.decode(rng.integers(0, s.group_order, 20000))
    val = B.evaluate(w, [X, Y], 20000)
    mask = B.diagonal_mask(val)
    assert mask.any()
    sel = [(X[0][mask], X[1][mask]), (Y[0][mask], Y[1][mask])]
    targets = val[1][mask, 0]
    back, ok = transfer_batch(s, w, targets, sel)
    assert ok.all()
    for n in range(min(30, len(targets))):
        gsol = [B.element(v, n) for v in sel]
        assert solution_transfer(s, w, int(targets[n]), gsol) == [int(back[0][n]), int(back[1][n])]


# -- value sets and audits ---------------------------------------------------------------

def test_value_set_examples(q8, s3):
    vals, complete = value_set(word(Var(0)), q8)
    assert vals == set(range(8)) and complete
    assert value_set(power(0, 2), q8)[0] == {0, 1}
    c = commutator(word(Var(0)), word(Var(1)))
    a3 = {g for g in range(6) if s3.element_order(g) in (1, 3)}
    assert value_set(c, s3)[0] == a3


def test_value_set_sampled(q8):
    vals, complete = value_set(commutator(word(Var(0)), word(Var(1))), q8, budget=10)
    assert not complete and vals <= {0, 1}


def test_exponent_of_g(q8_spec):
    assert group_exponent(q8_spec) == 4


def test_diagonal_powers_up_to_eight(q8_spec):
    # G has exponent 4, so e = 5..8 repeat e = 1..4; checked directly anyway
    s = q8_spec
    B = cons.GBatch(s)
    elems = B.all_elements()
    acc = elems
    for e in range(1, 9):
        if e > 1:
            acc = B.mul(acc, elems)
        mask = B.diagonal_mask(acc)
        got = set(int(h) for h in np.unique(acc[1][mask, 0]))
        assert got == {s.H.pow(h, e) for h in range(8)}


def test_audit_power_and_sampled_tiers(q8_spec):
    ev = verbal_closedness_audit(q8_spec, word_classes=("power", "random"), trials=30, seed=1)
    assert ev["violations"] == 0
    power_tiers = [t for t in ev["tiers"] if t["tier"] == "power"]
    assert [t["word"] for t in power_tiers] == ["x^1", "x^2", "x^3", "x^4"]
    # e = 1: every diagonal element is diag of itself
    assert power_tiers[0]["diagonal_hits"] == 8
    assert power_tiers[1]["diagonal_values"] == ["1", "-1"]


def test_audit_downgrades_with_note(q8_spec):
    ev = verbal_closedness_audit(q8_spec, word_classes=("power", "curated"), trials=20,
                                 g_cap=100, pair_cap=100)
    assert ev["complete_classes"] == []
    assert len(ev["notes"]) == 1 + len(curated_words())
    assert all(t["mode"] == "sampled" for t in ev["tiers"])
    assert ev["violations"] == 0


def test_audit_is_deterministic(q8_spec):
    a = verbal_closedness_audit(q8_spec, word_classes=("random",), trials=20, seed=4)
    b = verbal_closedness_audit(q8_spec, word_classes=("random",), trials=20, seed=4)
    assert a == b
