from fractions import Fraction

import pytest

from wwpd.pipeline import (
    ELLIPTIC,
    SCHOTTKY,
    BadBasis,
    ExponentSchedule,
    HypothesisViolated,
    PipelineSettings,
    build_f_sequence,
    build_gamma_qm,
    classify_actions,
    derive_commutator_basis,
    ell1_evaluate,
    f_word,
    run_report,
    wwpd_witness,
)
from wwpd.tree import axis_of
from wwpd.words import ReducedWord, exponent_sums
from wwpd.wreath import ProductWord, SemidirectModel, model_a, model_b

R = ReducedWord
A, B = model_a(), model_b()


def pw(*parts: str) -> ProductWord:
    return ProductWord([R(p) for p in parts])


# ------------------------------------------------------------ schedule and f words


def test_f_word_example():
    assert f_word(R("a"), R("b"), (1, 2, 3, 4, 5, 6)) == R("AAAAABBBBBBabbaaaBBBB")


def test_geometric_schedule_rows():
    s = ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 3)
    assert s.rows[1] == (64, 128, 256, 512, 1024, 2048)
    assert s.rows[2][0] == 2 * s.rows[1][-1]
    assert s.problems() == []
    assert ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 0).rows == ()


def test_schedule_problems_are_named():
    assert "at least 2 times" in ExponentSchedule(((1, 2, 3, 8, 16, 32),), 2).problems()[0]
    assert "six exponents" in ExponentSchedule(((1, 2),), 2).problems()[0]
    assert "growth" in ExponentSchedule(((1, 2, 4, 8, 16, 32),), 1).problems()[0]
    overlap = ExponentSchedule(((1, 2, 4, 8, 16, 32), (40, 80, 160, 320, 640, 1280)), 2)
    assert any("previous t" in p for p in overlap.problems())
    with pytest.raises(ValueError):
        ExponentSchedule.geometric((2, 1, 4, 8, 16, 32), 2, 1)


def test_escalate_keeps_invariants():
    s = ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 2).escalate()
    assert s.rows[0] == (2, 4, 8, 16, 32, 64)
    assert s.problems() == []


# ------------------------------------------------------------ bases and action types


def test_default_commutator_basis():
    g, h, info = derive_commutator_basis(A)
    assert (str(g), str(h)) == ("abAB", "aBAb")
    assert info["exponent_sums"] == [[0, 0], [0, 0]]


def test_basis_override():
    g, h, _ = derive_commutator_basis(A, ["a", "b"], require_commutator=False)
    assert (g, h) == (pw("a"), pw("b"))
    with pytest.raises(BadBasis):
        derive_commutator_basis(A, ["a", "b"])
    with pytest.raises(BadBasis):
        derive_commutator_basis(A, ["ab", "abab"], require_commutator=False)
    with pytest.raises(BadBasis):
        derive_commutator_basis(A, ["abAB"])


def test_classify_shipped_models():
    assert classify_actions(A) == [SCHOTTKY, SCHOTTKY]
    assert classify_actions(B) == [SCHOTTKY, ELLIPTIC]


def test_classify_rejects_mixed_action():
    # Under the swap, (a, a) and (b, 1) land on a and 1 in the base factor: rank 1.
    M = SemidirectModel("mixed", 2, 2, B.quotient, (pw("a", "a"), pw("b", "")))
    with pytest.raises(HypothesisViolated, match="neither"):
        classify_actions(M)


# ------------------------------------------------------------ f sequence and h_i


def test_f_sequence_empty_for_zero_length():
    fs = build_f_sequence(pw("abAB"), pw("aBAb"), ExponentSchedule((), 2), 0, A, [SCHOTTKY, SCHOTTKY])
    assert fs.f == [] and fs.certificates["9"]["pass"] and fs.certificates["10"]["pass"]


def test_f_sequence_certificates_pass():
    g, h, _ = derive_commutator_basis(A)
    sched = ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 3)
    fs = build_f_sequence(g, h, sched, 3, A, classify_actions(A))
    assert fs.escalations == 0
    assert all(fs.certificates[k]["pass"] for k in ("9", "10"))
    # Frozen from the first run.
    assert [len(f) for f in fs.f] == [250, 16126, 1032190]
    for f in fs.f:
        assert exponent_sums(f.factors[0]) == (0, 0)
    with pytest.raises(ValueError):
        build_f_sequence(g, h, sched, 4, A, classify_actions(A))


@pytest.fixture(scope="module")
def short_f():
    g, h, _ = derive_commutator_basis(A)
    sched = ExponentSchedule.geometric((1, 2, 4, 8, 16, 32), 2, 2)
    return build_f_sequence(g, h, sched, 2, A, classify_actions(A)).f


def test_gamma_qm_identity_and_own_powers(short_f):
    h1 = build_gamma_qm(1, short_f, [1, 1], A)
    assert h1(A.identity()) == 0
    f1 = short_f[0]
    assert [h1(A.from_n(f1 ** m)) for m in (1, 2, 5)] == [1, 2, 5]
    assert h1(A.from_n(f1)) == h1.on_n(f1)


def test_ell1_terms(short_f):
    hs = [build_gamma_qm(i, short_f, [1, 1], A) for i in (1, 2)]
    probe = A.from_n(short_f[0] ** 5)
    zero = ell1_evaluate([Fraction(0), Fraction(0)], hs, [probe])[0]
    assert zero["value"] == 0 and zero["terms"] == [0, 0]
    row = ell1_evaluate([Fraction(0), Fraction(1)], hs, [probe])[0]
    assert row["value"] == 0
    row = ell1_evaluate([Fraction(1), Fraction(1, 2)], hs, [probe])[0]
    assert row["terms"] == [5, 0] and row["value"] == 5


def test_wwpd_witness_on_model_a():
    g, _, _ = derive_commutator_basis(A)
    wit = wwpd_witness(A, g, max_len=4)
    # F_2 acting on its own tree: the stabiliser of an axis is cyclic.
    assert wit["stabilizer_pair"] is None
    assert wit["max_projection_diameter"] <= 2 * axis_of(g.factors[0]).translation_length


# ------------------------------------------------------------ reports


def _flags(model):
    rep = run_report(PipelineSettings(model=model, J=2, budget=300, seed=1, t=(Fraction(1), Fraction(1, 2))))
    return rep, {k: v["pass"] for k, v in rep.data["verdicts"].items()}


@pytest.mark.parametrize(
    "model, reps",
    [(A, [pw(""), pw("ab")]), (B, [pw("", ""), pw("ab", "b")])],
    ids=["A", "B"],
)
def test_verdicts_do_not_depend_on_representatives(model, reps):
    rep0, base = _flags(model)
    rep1, conj = _flags(model.with_reps(reps))
    assert base == conj
    assert rep0.passed and rep1.passed
    assert set(base) == {"9", "10", "11", "12", "13", "14", "step6"}


def test_report_is_seeded():
    a, _ = _flags(B)
    b, _ = _flags(B)
    assert a.data == b.data and a.series == b.series
    assert a.data["seed"] == 1
