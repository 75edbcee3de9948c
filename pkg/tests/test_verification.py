import pytest

from treecert.limits import CapExceededError
from treecert.protocol import Certificate, iter_certificates
from treecert.trees import NodeSet
from treecert import verification as V


@pytest.mark.parametrize("n", [3, 4, 5])
def test_soundness_exhaustive(n):
    rep = V.check_soundness(n)
    assert rep.passed
    assert rep.checks_run["certificates"] == len(list(iter_certificates(n)))


def test_soundness_counts_n4():
    rep = V.check_soundness(4)
    assert rep.checks_run["trees"] == 16 and rep.checks_run["sets"] == 10
    assert rep.checks_run["certificates"] == 72


def test_soundness_randomized():
    rep = V.check_soundness(100, "randomized", samples=1500, seed=7)
    assert rep.passed and rep.checks_run["samples"] == 1500
    assert rep.checks_run["accepted"] > 0


@pytest.mark.parametrize("tie_break", ["min", "max"])
def test_completeness_exhaustive(tie_break):
    for n in (3, 4, 5):
        assert V.check_completeness(n, tie_break=tie_break).passed


def test_completeness_randomized():
    rep = V.check_completeness(50, "randomized", samples=300, seed=3)
    assert rep.passed and rep.checks_run["pairs"] == 300


def test_cap_enforced():
    with pytest.raises(CapExceededError):
        V.check_soundness(7)
    with pytest.raises(ValueError):
        V.check_completeness(2)
    with pytest.raises(ValueError):
        V.check_soundness(5, "bogus")


def test_reports_deterministic():
    a = V.check_soundness(60, "randomized", samples=300, seed=11)
    b = V.check_soundness(60, "randomized", samples=300, seed=11)
    assert a.to_text(timing=False) == b.to_text(timing=False)
    c = V.check_triangle_lemma(12, 5000, seed=2, replay=200)
    d = V.check_triangle_lemma(12, 5000, seed=2, replay=200)
    assert c.to_text(timing=False) == d.to_text(timing=False)


def test_thread_count_does_not_change_results():
    one = V.check_soundness(5, threads=1)
    two = V.check_soundness(5, threads=2)
    assert one.to_text(timing=False) == two.to_text(timing=False)
    one = V.check_completeness(5, threads=1)
    two = V.check_completeness(5, threads=2)
    assert one.to_text(timing=False) == two.to_text(timing=False)


def test_triangle_exhaustive_small():
    rep = V.check_triangle_lemma(4, mode="exhaustive")
    assert rep.passed and rep.checks_run["degenerate"] > 0


def test_triangle_randomized_replays_agree():
    rep = V.check_triangle_lemma(10, 20_000, seed=5, replay=1000)
    assert rep.passed
    assert rep.checks_run["replayed"] == 1000
    assert rep.checks_run["degenerate"] > 0


def test_extract_rectangle_example():
    rect = V.extract_rectangle(Certificate(1, 2, 1, 0, 0), 4)
    uni = V.universe(4)
    assert rect.rows == [s for s in uni.sets if 1 in s and 2 in s and 3 not in s]
    assert rect.cols == [j for j, t in enumerate(uni.trees) if t.is_on_path(1, 3, 2)]


def test_extract_rectangle_empty_candidates():
    assert V.extract_rectangle(Certificate(1, 2, 0, 0, 0), 4).cols == []


def test_rectangles_monochromatic_and_cover():
    for n in (3, 4, 5):
        assert V.check_rectangle_cover(n).passed


def test_naive_cross_check():
    for n in (3, 4, 5):
        assert V.cross_check_naive(n).passed


def test_combined_protocol():
    for n in (3, 4):
        assert V.check_combined(n).passed


def test_report_text_on_violation():
    rep = V.VerificationReport("soundness", 4, "exhaustive", command="treecert verify --n 4 --mode exhaustive")
    rep.violations.append(V.Violation("accepted-zero", "1,2,1,0,0", "{1,2}", "4;1-2,2-3,3-4"))
    text = rep.to_text(timing=False)
    assert "status: FAIL" in text
    assert "reproduce: treecert verify --n 4 --mode exhaustive" in text
    assert "violation: accepted-zero evidence=1,2,1,0,0 S={1,2} T=4;1-2,2-3,3-4" in text


def test_broken_protocol_is_caught(monkeypatch):
    """A Bob who accepts every certificate must produce soundness violations."""
    monkeypatch.setattr(V, "bob_accept", lambda t, c: True)
    monkeypatch.setattr(V, "candidate_rs", lambda c, n: [0])
    rep = V.check_soundness(4)
    assert not rep.passed
    assert all(v.kind == "accepted-zero" for v in rep.violations)
