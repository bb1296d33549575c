"""The full construction on a configured model, with every property checked.

Stages: a commutator basis of F, a good free basis, the sequence ``f_j``
with its inequivalence certificates, powers ``d_i``, the quasimorphisms
``h_i`` on Gamma through the Kaloujnin-Krasner embedding, probe series for
the sign and vanishing properties, defect estimates, and the evaluation of
a finite combination ``h_(t)``.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .qm import QmFunction, choose_powers, make_axis_word, PowerSearchExhausted
from .tree import (
    NotLoxodromic,
    SearchExhausted,
    TreeAction,
    UNBOUNDED,
    axis_of,
    boundary_pair,
    folded_rank,
    good_basis,
    projection_diameter,
    sim_equivalent,
    stab_membership,
    translate_axis,
)
from .words import ReducedWord, exponent_sums, random_word, words_up_to
from .wreath import GammaElement, ProductWord, SemidirectModel

__all__ = [
    "BadBasis",
    "HypothesisViolated",
    "ScheduleExhausted",
    "ExponentSchedule",
    "f_word",
    "derive_commutator_basis",
    "classify_actions",
    "build_f_sequence",
    "FSequence",
    "GammaQm",
    "build_gamma_qm",
    "ell1_evaluate",
    "PipelineSettings",
    "QmReport",
    "run_report",
    "wwpd_witness",
]

SCHOTTKY = "Schottky"
ELLIPTIC = "Elliptic"


class BadBasis(ValueError):
    pass


class HypothesisViolated(RuntimeError):
    pass


class ScheduleExhausted(RuntimeError):
    pass


# ----------------------------------------------------------------- schedule


@dataclass(frozen=True)
class ExponentSchedule:
    """Rows ``(m, n, k, l, s, t)``; each entry at least ``growth`` times the previous one."""

    rows: tuple[tuple[int, ...], ...]
    growth: int

    @classmethod
    def geometric(cls, row1: Sequence[int], growth: int, J: int) -> "ExponentSchedule":
        """Row 1 as given; each later row is row 1 scaled so that it starts at or above ``t * growth``."""
        row1 = tuple(int(x) for x in row1)
        rows = [row1] if J >= 1 else []
        for _ in range(1, J):
            lam = -(-rows[-1][-1] * growth // row1[0])
            rows.append(tuple(lam * x for x in row1))
        sched = cls(tuple(rows), growth)
        problems = sched.problems()
        if problems:
            raise ValueError(problems[0])
        return sched

    def problems(self) -> list[str]:
        out = []
        if self.growth < 2:
            out.append("growth factor must be at least 2")
        for j, row in enumerate(self.rows, 1):
            if len(row) != 6:
                out.append(f"row {j} must have six exponents (m, n, k, l, s, t)")
                continue
            if row[0] < 1:
                out.append(f"row {j}: exponents must be positive")
            for a, b in zip(row, row[1:]):
                if b < self.growth * a:
                    out.append(f"row {j}: each exponent must be at least {self.growth} times the previous one")
                    break
        for j in range(1, len(self.rows)):
            if self.rows[j - 1][-1] * self.growth > self.rows[j][0]:
                out.append(f"row {j + 1}: m must be at least growth times the previous t")
        return out

    def escalate(self) -> "ExponentSchedule":
        g = self.growth
        return ExponentSchedule(tuple(tuple(g * x for x in r) for r in self.rows), g)


def f_word(g: Any, h: Any, row: Sequence[int]) -> Any:
    """``g^-s h^-t g^m h^n g^k h^-l`` for ``row = (m, n, k, l, s, t)``."""
    m, n, k, l, s, t = row
    return (g ** -s) * (h ** -t) * (g ** m) * (h ** n) * (g ** k) * (h ** -l)


# ----------------------------------------------------------------- basis


def _f_to_n(model: SemidirectModel, w: ReducedWord) -> ProductWord:
    a, b = model.F_basis
    imgs = {"a": a, "b": b, "A": a.inverse(), "B": b.inverse()}
    out = ProductWord.identity(model.n_factors, model.rank)
    for ch in w.letters:
        out = out * imgs[ch]
    return out


def derive_commutator_basis(
    model: SemidirectModel,
    override: Sequence[str] | None = None,
    require_commutator: bool = True,
) -> tuple[ProductWord, ProductWord, dict]:
    """``([a,b], [a,b^-1])`` in terms of the basis of F, unless overridden.

    Returns the pair as elements of N together with their words in F.
    """
    texts = list(override) if override else ["abAB", "aBAb"]
    if len(texts) != 2:
        raise BadBasis("a basis override needs exactly two words")
    words = [ReducedWord.parse(t, 2) for t in texts]
    if require_commutator and any(exponent_sums(w) != (0, 0) for w in words):
        raise BadBasis("basis words must have zero exponent sums")
    if folded_rank(words) != 2:
        raise BadBasis(f"{texts} does not generate a rank-2 subgroup")
    g, h = (_f_to_n(model, w) for w in words)
    info = {"words": [w.letters for w in words], "exponent_sums": [list(exponent_sums(w)) for w in words]}
    return g, h, info


def _base_action(model: SemidirectModel) -> TreeAction:
    return TreeAction(f"{model.name}:base", model.base_image, model.rank)


def classify_actions(model: SemidirectModel, basis: Sequence[ProductWord] | None = None, seed: int = 0) -> list[str]:
    """Tag each action ``kappa`` of F as Schottky or Elliptic.

    Schottky: the images of the basis fold to rank 2 (so every non-trivial
    element is loxodromic) and translates of one axis have bounded
    projections.  Elliptic: every sampled element acts trivially.
    """
    basis = list(basis) if basis is not None else list(model.F_basis)
    rng = random.Random(seed)
    samples = [_f_to_n(model, random_word(rng, rng.randint(1, 6))) for _ in range(50)]
    tags = []
    for kappa in range(1, model.K + 1):
        act = model.action(kappa)
        imgs = [act.element_image(x) for x in basis]
        if all(i.is_identity() for i in imgs):
            if any(not act.element_image(s).is_identity() for s in samples):
                raise HypothesisViolated(f"action {kappa}: basis elliptic but a sampled element is not")
            tags.append(ELLIPTIC)
            continue
        if folded_rank(imgs) != 2:
            raise HypothesisViolated(f"action {kappa}: F is neither Schottky nor elliptic (image rank < 2)")
        A = axis_of(basis[0], act)
        P = boundary_pair(basis[0], act)
        bound = 2 * A.translation_length
        for k in words_up_to(3):
            kn = act.element_image(_f_to_n(model, k))
            if stab_membership(kn, P):
                continue
            if projection_diameter(A, translate_axis(A, kn)) > bound:
                raise HypothesisViolated(f"action {kappa}: unbounded projections for translate by {k}")
        tags.append(SCHOTTKY)
    if tags[0] != SCHOTTKY:
        raise HypothesisViolated("the base action of F must be Schottky")
    return tags


# ----------------------------------------------------------------- f sequence


@dataclass
class FSequence:
    f: list[ProductWord]
    schedule: ExponentSchedule
    escalations: int
    certificates: dict[str, dict]


def _not_sim(x: ProductWord, y: ProductWord, act: TreeAction) -> bool:
    try:
        return not sim_equivalent(x, y, act)
    except NotLoxodromic:
        # An elliptic element is inequivalent to every loxodromic one.
        return True


def _certificates(f: list[ProductWord], model: SemidirectModel, tags: list[str]) -> dict[str, dict]:
    base = _base_action(model)
    nine, ten = [], []
    for i, fi in enumerate(f, 1):
        for kappa in range(1, model.K + 1):
            if tags[kappa - 1] == ELLIPTIC:
                nine.append({"i": i, "kappa": kappa, "ok": True, "reason": "elliptic"})
                continue
            other = model.outer_rep(kappa, fi.inverse())
            nine.append({"i": i, "kappa": kappa, "ok": _not_sim(fi, other, base)})
        for j, fj in enumerate(f[: i - 1], 1):
            for kappa in range(1, model.K + 1):
                if tags[kappa - 1] == ELLIPTIC:
                    ten.append({"i": i, "j": j, "kappa": kappa, "ok": True, "reason": "elliptic"})
                    continue
                img = model.outer_rep(kappa, fj)
                ok = _not_sim(fi, img, base) and _not_sim(fi, img.inverse(), base)
                ten.append({"i": i, "j": j, "kappa": kappa, "ok": ok})
    return {
        "9": {"pass": all(c["ok"] for c in nine), "witness": nine},
        "10": {"pass": all(c["ok"] for c in ten), "witness": ten},
    }


def build_f_sequence(
    g: ProductWord,
    h: ProductWord,
    schedule: ExponentSchedule,
    J: int,
    model: SemidirectModel,
    tags: list[str],
    max_escalations: int = 4,
) -> FSequence:
    if J <= 0:
        return FSequence([], schedule, 0, {"9": {"pass": True, "witness": []}, "10": {"pass": True, "witness": []}})
    if len(schedule.rows) < J:
        raise ValueError("schedule has fewer rows than J")
    sched = schedule
    for esc in range(max_escalations + 1):
        f = [f_word(g, h, row) for row in sched.rows[:J]]
        certs = _certificates(f, model, tags)
        if certs["9"]["pass"] and certs["10"]["pass"]:
            return FSequence(f, sched, esc, certs)
        sched = sched.escalate()
    raise ScheduleExhausted(f"certificates still failing after {max_escalations} escalations")


# ----------------------------------------------------------------- h_i on Gamma


class GammaQm:
    """``h_i(mu) = sum over kappa of h(f_i^{d_i})(rho_mu(B_kappa))``."""

    def __init__(self, model: SemidirectModel, base_qm: QmFunction):
        self.model = model
        self.base = base_qm

    def __call__(self, mu: GammaElement) -> int:
        theta = self.model.kk_embed(mu)
        return sum(self.base(r) for r in theta.rho)

    def on_n(self, n: ProductWord) -> int:
        """The same value computed through the outer representatives."""
        return sum(self.base(self.model.outer_rep(k, n)) for k in range(1, self.model.K + 1))


def build_gamma_qm(i: int, f_list: Sequence[ProductWord], d_list: Sequence[int], model: SemidirectModel, W: int = 1) -> GammaQm:
    base = _base_action(model)
    spec = make_axis_word(f_list[i - 1], d_list[i - 1], base, W)
    return GammaQm(model, QmFunction(spec))


def ell1_evaluate(t: Sequence[Fraction], hs: Sequence[GammaQm], probes: Sequence[GammaElement]) -> list[dict]:
    """``h_(t)(probe) = sum t_i h_i(probe)``, with every term kept."""
    rows = []
    for p in probes:
        terms = [Fraction(ti) * hi(p) if ti else Fraction(0) for ti, hi in zip(t, hs)]
        rows.append({"probe": p, "terms": terms, "value": sum(terms, Fraction(0))})
    return rows


# ----------------------------------------------------------------- witnesses


def wwpd_witness(model: SemidirectModel, g: ProductWord, max_len: int = 6) -> dict:
    """Non-commuting stabiliser elements and the projection bound for the axis of ``g``."""
    base = _base_action(model)
    P = boundary_pair(g, base)
    A = axis_of(g, base)
    # Candidates: short elements of each factor of N.
    cands = []
    for k in range(model.n_factors):
        for w in words_up_to(1, model.rank):
            if w.letters:
                cands.append(ProductWord.embed(w, k, model.n_factors))
    stab = [c for c in cands if stab_membership(c, P, base)]
    pair = None
    for x in stab:
        for y in stab:
            if x * y != y * x:
                pair = (x, y)
                break
        if pair:
            break
    worst, worst_at, checked = 0, None, 0
    for u in words_up_to(max_len, model.rank):
        if stab_membership(u, P):
            continue
        checked += 1
        pd = projection_diameter(A, translate_axis(A, u))
        if pd > worst:
            worst, worst_at = pd, u.letters
    return {
        "stabilizer_pair": [str(x) for x in pair] if pair else None,
        "stabilizer_pair_commutes": False if pair else None,
        "max_projection_diameter": "unbounded" if worst == UNBOUNDED else worst,
        "max_at": worst_at,
        "translates_checked": checked,
        "max_length": max_len,
    }


# ----------------------------------------------------------------- report


@dataclass
class PipelineSettings:
    model: SemidirectModel
    row1: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    growth: int = 2
    max_escalations: int = 4
    J: int = 3
    W: int = 1
    probe_cap: int = 20
    budget: int = 2000
    seed: int = 0
    power_cap: int = 8
    a_max: int = 64
    basis: tuple[str, str] | None = None
    require_commutator: bool = True
    t: tuple[Fraction, ...] = (Fraction(1), Fraction(1, 2), Fraction(1, 4))
    echo: dict = field(default_factory=dict)


@dataclass
class QmReport:
    data: dict
    series: list[tuple]  # (i, j, kappa, d, value)

    @property
    def passed(self) -> bool:
        return bool(self.data["passed"])


def _digest(x: ProductWord) -> str:
    return hashlib.sha256(str(x).encode()).hexdigest()[:16]


def _frac(x: Fraction) -> str:
    return str(x) if x.denominator != 1 else str(x.numerator)


class _Sampler:
    """Random Gamma elements built from short words, pieces of the f_j, and their powers."""

    def __init__(self, model: SemidirectModel, f: list[ProductWord], rng: random.Random):
        self.model, self.f, self.rng = model, f, rng
        # Later f_j are long; they are drawn rarely.
        self.weights = [0.25 / 4 ** j for j in range(len(f))]

    def token(self) -> ProductWord:
        m, rng = self.model, self.rng
        x = rng.random()
        acc = 0.0
        for j, wgt in enumerate(self.weights):
            acc += wgt
            if x < acc:
                fj = self.f[j] if rng.random() < 0.5 else self.f[j].inverse()
                kind = rng.random()
                if kind < 0.4:
                    return fj ** rng.randint(1, 2)
                # A prefix of f_j cuts copies in half.
                fac = fj.factors[m.base_factor]
                cut = rng.randint(1, max(1, len(fac) - 1))
                return ProductWord.embed(fac.prefix(cut), m.base_factor, m.n_factors)
        return ProductWord([random_word(rng, rng.randint(0, 6), m.rank) for _ in range(m.n_factors)])

    def element(self) -> GammaElement:
        n = ProductWord.identity(self.model.n_factors, self.model.rank)
        for _ in range(self.rng.randint(1, 3)):
            n = n * self.token()
        return GammaElement(n, self.rng.randrange(self.model.K), self.model)

    def pair(self) -> tuple[GammaElement, GammaElement]:
        return self.element(), self.element()


def run_report(cfg: PipelineSettings) -> QmReport:
    model = cfg.model
    K = model.K
    W = cfg.W
    cap = cfg.probe_cap
    data: dict[str, Any] = {"model": model.name, "K": K, "seed": cfg.seed, "config": cfg.echo}
    series: list[tuple] = []
    verdicts: dict[str, dict] = {}
    data["verdicts"] = verdicts
    base = _base_action(model)

    # Step 0 and 2: bases.
    g0, h0, info = derive_commutator_basis(model, cfg.basis, cfg.require_commutator)
    tags = classify_actions(model, [g0, h0], seed=cfg.seed)
    K1 = sum(t == SCHOTTKY for t in tags)
    live = [model.action(k) for k in range(1, K + 1) if tags[k - 1] == SCHOTTKY]
    g1, h1, a = good_basis(g0, h0, live, cfg.a_max)
    data["actions"] = tags
    data["K1"] = K1
    data["basis"] = {
        "commutator_basis": info["words"],
        "exponent_sums": info["exponent_sums"],
        "a": a,
        "g1": str(g1),
        "h1": str(h1),
    }

    # Step 3: the f_j.
    sched = ExponentSchedule.geometric(cfg.row1, cfg.growth, cfg.J)
    fs = build_f_sequence(g1, h1, sched, cfg.J, model, tags, cfg.max_escalations)
    f = fs.f
    verdicts.update(fs.certificates)
    data["schedule"] = {"growth": sched.growth, "rows": [list(r) for r in fs.schedule.rows], "escalations": fs.escalations}
    data["f"] = [
        {
            "index": i,
            "length": len(fi),
            "translation_length": axis_of(fi, base).translation_length,
            "exponent_sums": [list(exponent_sums(x)) for x in fi.factors],
            "prefix": str(fi)[:48],
            "sha256_16": _digest(fi),
        }
        for i, fi in enumerate(f, 1)
    ]

    # Step 4 and 5: powers and probe series.
    qms: dict[tuple[int, int], QmFunction] = {}

    def qm(i: int, d: int) -> QmFunction:
        key = (i, d)
        if key not in qms:
            qms[key] = QmFunction(make_axis_word(f[i - 1], d, base, W))
        return qms[key]

    def probes(i: int, d_i: int) -> dict:
        h = qm(i, d_i)
        out = {"11": [], "12": {}, "14": {}}
        for d in range(1, cap + 1):
            out["11"].append(h(f[i - 1] ** d))
        for kappa in range(2, K + 1):
            gk = model.outer_rep(kappa, f[i - 1])
            out["12"][kappa] = [h(gk ** d) for d in range(1, cap + 1)]
        for j in range(1, i):
            for kappa in range(1, K + 1):
                gk = model.outer_rep(kappa, f[j - 1])
                out["14"][(j, kappa)] = [h(gk ** d) for d in range(-cap, cap + 1)]
        return out

    def judge(i: int, pr: dict) -> dict:
        s11 = pr["11"]
        ok11 = all(v >= 0 for v in s11) and s11[-1] - s11[0] >= W
        ok12 = True
        for kappa, vals in pr["12"].items():
            if tags[kappa - 1] == SCHOTTKY:
                ok12 &= all(v >= 0 for v in vals)
            else:
                ok12 &= all(v == 0 for v in vals)
        ok14 = all(v == 0 for vals in pr["14"].values() for v in vals)
        return {"11": ok11, "12": ok12, "14": ok14}

    probe_data: dict[int, dict] = {}

    def accept(idx: int, d: int) -> bool:
        pr = probes(idx + 1, d)
        probe_data[idx + 1] = pr
        return all(judge(idx + 1, pr).values())

    try:
        d_list = choose_powers(f, base, W, accept, cfg.power_cap)
        power_error = None
    except PowerSearchExhausted as exc:
        power_error = str(exc)
        d_list = [max(1, math.ceil(2 * W / axis_of(fi, base).translation_length)) for fi in f]
        for i in range(1, len(f) + 1):
            probe_data[i] = probes(i, d_list[i - 1])
    data["powers"] = d_list
    data["power_search_error"] = power_error

    w11, w12, w14 = [], [], []
    for i in range(1, len(f) + 1):
        pr = probe_data[i]
        v = judge(i, pr)
        s11 = pr["11"]
        w11.append({"i": i, "values": s11, "ok": v["11"], "growth": s11[-1] - s11[0]})
        for d, val in enumerate(s11, 1):
            series.append((i, i, 1, d, val))
        for kappa, vals in pr["12"].items():
            w12.append({"i": i, "kappa": kappa, "tag": tags[kappa - 1], "values": vals,
                        "ok": all(x >= 0 for x in vals) if tags[kappa - 1] == SCHOTTKY else all(x == 0 for x in vals)})
            for d, val in enumerate(vals, 1):
                series.append((i, i, kappa, d, val))
        for (j, kappa), vals in sorted(pr["14"].items()):
            w14.append({"i": i, "j": j, "kappa": kappa, "ok": all(x == 0 for x in vals),
                        "nonzero": [(d, x) for d, x in zip(range(-cap, cap + 1), vals) if x != 0]})
            for d, val in zip(range(-cap, cap + 1), vals):
                series.append((i, j, kappa, d, val))
    verdicts["11"] = {"pass": all(x["ok"] for x in w11), "witness": w11, "status": "verified on window"}
    verdicts["12"] = {"pass": all(x["ok"] for x in w12), "witness": w12}
    verdicts["14"] = {"pass": all(x["ok"] for x in w14), "witness": w14}

    # Defect: h_i on Gamma against K times the sampled defect of h(f_i^{d_i}) on N.
    hs = [GammaQm(model, qm(i, d_list[i - 1])) for i in range(1, len(f) + 1)]
    verdicts["13"] = _defect_check(model, f, hs, cfg)

    # Step 6.
    verdicts["step6"] = _step6(model, f, hs, cfg)

    # WWPD without WPD: a non-virtually-cyclic stabiliser with bounded projections.
    wit = wwpd_witness(model, g1)
    data["wwpd_witness"] = wit
    data["long_optimal_paths"] = sum(len(q.long_paths) for q in qms.values())
    data["notes"] = {
        "unboundedness": "strict growth verified on the probe window; copies of w(f_j^d_j) accumulate along f_j^d",
        "defect": "sampled values are lower bounds for the true defect",
    }
    data["passed"] = all(v["pass"] for v in verdicts.values()) and power_error is None
    return QmReport(data, series)


def _defect_check(model: SemidirectModel, f: list[ProductWord], hs: list[GammaQm], cfg: PipelineSettings) -> dict:
    K = model.K
    rng = random.Random(cfg.seed)
    sampler = _Sampler(model, f, rng)
    pairs = [sampler.pair() for _ in range(cfg.budget)]
    # The N-pairs every Gamma pair induces, one per coset, plus plain N pairs.
    n_pairs = []
    for mu, nu in pairs:
        tm = model.kk_embed(mu)
        tn = model.kk_embed(nu)
        for B in range(K):
            n_pairs.append((tm.rho[B], tn.rho[tm.phi[B]]))
        n_pairs.append((mu.n, nu.n))
    rows = []
    for i, h in enumerate(hs, 1):
        base = h.base
        d_n = max(abs(base(x) - base(x * y) + base(y)) for x, y in n_pairs)
        d_gamma = max(abs(h(mu) - h(mu * nu) + h(nu)) for mu, nu in pairs)
        rows.append({"i": i, "defect_N": d_n, "defect_Gamma": d_gamma})
    D_hat = max((r["defect_N"] for r in rows), default=0)
    for r in rows:
        r["ok"] = r["defect_Gamma"] <= K * D_hat
    return {
        "pass": all(r["ok"] for r in rows),
        "D_hat": D_hat,
        "K": K,
        "bound": K * D_hat,
        "gamma_pairs": len(pairs),
        "n_pairs": len(n_pairs),
        "witness": rows,
        "status": "sampled lower bounds",
    }


def _step6(model: SemidirectModel, f: list[ProductWord], hs: list[GammaQm], cfg: PipelineSettings) -> dict:
    t = list(cfg.t)[: len(hs)]
    nonzero = [i for i, x in enumerate(t) if x != 0]
    if not nonzero:
        return {"pass": True, "t": [_frac(x) for x in t], "note": "t is zero"}
    j = nonzero[0]
    probes = [model.from_n(f[j] ** d) for d in (1, cfg.probe_cap)]
    rows = ell1_evaluate(t, hs, probes)
    lo, hi = rows[0]["value"], rows[-1]["value"]
    higher_zero = all(r["terms"][i] == 0 for r in rows for i in range(j + 1, len(t)))
    cross = all(hs[j](p) == hs[j].on_n(p.n) for p in probes)
    sums_zero = all(all(s == 0 for x in fi.factors for s in exponent_sums(x)) for fi in f)
    grows = hi - lo >= cfg.W
    return {
        "pass": grows and higher_zero and sums_zero and cross,
        "t": [_frac(x) for x in t],
        "j": j + 1,
        "value_d1": _frac(lo),
        f"value_d{cfg.probe_cap}": _frac(hi),
        "terms_d1": [_frac(x) for x in rows[0]["terms"]],
        f"terms_d{cfg.probe_cap}": [_frac(x) for x in rows[-1]["terms"]],
        "higher_terms_zero": higher_zero,
        "exponent_sums_zero": sums_zero,
        "f_in_N": True,
        "rho_matches_outer_reps": cross,
    }
