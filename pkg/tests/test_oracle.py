import itertools
import math

import numpy as np
import pytest

from slopecoder.cost import CoeffMatrix, hamming
from slopecoder.errors import BudgetError
from slopecoder.oracle import (exhaustive_p1, exhaustive_p2, phi, phi_lemma_report, verify_phi_lemma,
                               verify_theorem1)
from slopecoder.viterbi import viterbi_solve


def brute_p1(x, k, alpha):
    """Independent P1 enumeration with a dictionary-based H_k."""
    n = len(x)
    vals = {}
    for y in itertools.product((0, 1), repeat=n):
        joint = {}
        for i in range(n):
            w = tuple(y[(i - k + j) % n] for j in range(k + 1))
            joint[w] = joint.get(w, 0) + 1
        marg = {}
        for w, c in joint.items():
            marg[w[:-1]] = marg.get(w[:-1], 0) + c
        h = sum(c / n * math.log2(marg[w[:-1]] / c) for w, c in joint.items())
        vals[y] = h + alpha * sum(a != b for a, b in zip(x, y)) / n
    best = min(vals.values())
    return best, sorted(y for y, v in vals.items() if v <= best + 1e-12)


def test_p1_large_slope():
    x = np.array([0, 1, 1, 0, 1])
    best, s1 = exhaustive_p1(x, 1, 50.0)
    assert s1 == [tuple(x)]


def test_p1_zero_slope():
    best, s1 = exhaustive_p1([0, 1, 1, 0, 1], 1, 0.0)
    assert best == 0.0
    assert (0,) * 5 in s1 and (1,) * 5 in s1


def test_p1_reference_instance():
    best, s1 = exhaustive_p1([0, 0, 1, 1], 1, 0.5)
    ref_best, ref_set = brute_p1([0, 0, 1, 1], 1, 0.5)
    assert best == pytest.approx(ref_best, abs=1e-12)
    assert sorted(s1) == ref_set
    # frozen from the brute force above
    assert ref_best == pytest.approx(0.25, abs=1e-12)
    assert ref_set == [(0, 0, 0, 0), (0, 1, 0, 1), (1, 0, 1, 0), (1, 1, 1, 1)]


def test_p1_random_against_brute(rng):
    for _ in range(10):
        x = rng.integers(0, 2, 6).tolist()
        k = int(rng.integers(0, 3))
        alpha = float(rng.uniform(0, 3))
        best, s1 = exhaustive_p1(x, k, alpha)
        ref_best, ref_set = brute_p1(x, k, alpha)
        assert best == pytest.approx(ref_best, abs=1e-12)
        assert sorted(s1) == ref_set


def test_p2_zero_coefficients():
    lam = CoeffMatrix.from_table(np.zeros((2, 2)), 8)
    best, s2 = exhaustive_p2([1, 0, 0, 1, 1], lam, 0.7)
    assert best == 0.0 and s2 == [(1, 0, 0, 1, 1)]


def test_p2_matches_viterbi_on_all_length6(rng):
    for bits in range(64):
        x = [(bits >> j) & 1 for j in range(5, -1, -1)]
        lam = CoeffMatrix.from_table(rng.uniform(0, 8, (2, 2)), 8)
        alpha = float(rng.uniform(0, 4))
        best, s2 = exhaustive_p2(x, lam, alpha, convention="linear")
        y, cost = viterbi_solve(x, lam, alpha)
        assert cost == pytest.approx(best, abs=1e-12)
        assert tuple(y) in s2


def test_equivalence_examples():
    rep = verify_theorem1([0, 1, 0, 1], 1, 1.0)
    assert rep.equal_minima and rep.s2_subset_s1 and rep.s2_contains_type_class
    rep = verify_theorem1([1] * 6, 1, 1.0)
    assert (1,) * 6 in rep.argmin_set_p1
    assert rep.ok


@pytest.mark.parametrize("cap", [8.0, 16.0, 32.0])
def test_equivalence_cap_sensitivity(cap):
    failures = []
    for bits in range(64):
        x = [(bits >> j) & 1 for j in range(5, -1, -1)]
        for alpha in (0.25, 0.5, 1.0, 2.0):
            rep = verify_theorem1(x, 1, alpha, cap=cap)
            if not (rep.ok and rep.s2_contains_type_class):
                failures.append(rep.to_text())
    assert not failures, "\n".join(failures)


def test_report_serialisation():
    rep = verify_theorem1([0, 1, 1, 0], 1, 0.5)
    assert "min P1" in rep.to_text()
    row = rep.csv_row()
    assert row["x"] == "0110" and row["equal_minima"] == 1


def test_phi_zero_coefficients():
    lam = CoeffMatrix.from_table(np.zeros((2, 2)), 8)
    assert phi(lam, [0, 1, 1, 0, 1], 2.0) == 0.0


@pytest.mark.parametrize("convention", ["linear", "cyclic"])
def test_phi_concave_along_segments(rng, convention):
    x = rng.integers(0, 2, 7)
    for _ in range(20):
        l1 = rng.uniform(0, 6, (2, 2))
        l2 = rng.uniform(0, 6, (2, 2))
        p1 = phi(CoeffMatrix.from_table(l1, 6), x, 1.0, convention=convention)
        p2 = phi(CoeffMatrix.from_table(l2, 6), x, 1.0, convention=convention)
        for theta in np.linspace(0.1, 0.9, 9):
            mid = phi(CoeffMatrix.from_table(theta * l1 + (1 - theta) * l2, 6), x, 1.0, convention=convention)
            assert mid >= theta * p1 + (1 - theta) * p2 - 1e-9


@pytest.mark.parametrize("convention", ["linear", "cyclic"])
def test_phi_lemma(convention):
    assert verify_phi_lemma([0, 1, 1, 0, 1, 0], 1, 1.0, convention=convention)
    rep = phi_lemma_report([1] * 6, 1, 1.0, convention=convention)
    assert rep.holds and rep.min_energy == 0.0 and rep.min_phi == 0.0


def test_budget():
    with pytest.raises(BudgetError):
        exhaustive_p1([0] * 25, 1, 1.0)
    with pytest.raises(BudgetError):
        exhaustive_p2([0] * 13, CoeffMatrix.from_table(np.zeros((4, 4)), 8), 1.0, hamming(4))
