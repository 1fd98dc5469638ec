import numpy as np
import pytest

from softcoul import crossing_utils
from softcoul.crossing_utils import (
    AuditReport,
    CROSSING_COLUMNS,
    audit_conjecture,
    beta_grid,
    block_energies,
    find_crossing,
    order_pair,
    q_sweep,
    rule_compliant,
    scan_levels,
    scan_pair,
)
from softcoul.config_utils import DEFAULT_SETTINGS
from softcoul.exceptions import InvalidInputError
from softcoul.potential_utils import parse_state

SIX_S, SEVEN_F = parse_state("6s"), parse_state("7f")


def _analytic(monkeypatch, energy_a, energy_b):
    def fake(Z, q, beta, labels, settings):
        return np.array([energy_a(beta), energy_b(beta)])

    monkeypatch.setattr(crossing_utils, "_pair_energies", fake)
    betas = np.arange(0.0, 5.01, 0.5)
    table = np.column_stack([[energy_a(b) for b in betas], [energy_b(b) for b in betas]])
    return betas, table


# ============================================================
# 격자 / 규칙
# ============================================================

def test_beta_grid_includes_endpoint():
    np.testing.assert_allclose(beta_grid((0.0, 1.0), 0.25), [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(beta_grid((0.0, 1.0), 0.3), [0, 0.3, 0.6, 0.9, 1.0])
    assert beta_grid((0.0, 100.0), 1.0).size == 101
    with pytest.raises(InvalidInputError):
        beta_grid((1.0, 0.0), 0.1)
    with pytest.raises(InvalidInputError):
        beta_grid((0.0, 1.0), 0.0)


def test_rule_compliance():
    assert rule_compliant(SIX_S, SEVEN_F)
    assert rule_compliant(SEVEN_F, SIX_S)
    assert rule_compliant(parse_state("6s"), parse_state("7i"))
    assert not rule_compliant(parse_state("6s"), parse_state("7d"))
    assert not rule_compliant(parse_state("4s"), parse_state("4f"))


def test_order_pair():
    assert order_pair(SEVEN_F, SIX_S) == (SIX_S, SEVEN_F)
    with pytest.raises(InvalidInputError):
        order_pair(SIX_S, SIX_S)


# ============================================================
# 교차 탐색 (해석적 곡선)
# ============================================================

def test_scan_pair_finds_single_crossing(monkeypatch):
    betas, table = _analytic(monkeypatch, lambda b: -1.0 + 0.1 * b, lambda b: -0.77 + 0.0 * b)
    scan = scan_pair(1.0, 1.0, (SEVEN_F, SIX_S), (0.0, 5.0), 0.5, betas=betas, table=table)

    assert scan.complete
    (record,) = scan.crossings
    assert record.state_a == SIX_S and record.state_b == SEVEN_F
    assert record.beta_star == pytest.approx(2.3, abs=1e-9)
    assert record.bracket == (2.0, 2.5)
    assert record.residual < 1e-8
    assert record.rule_compliant


def test_scan_pair_reports_near_degeneracy(monkeypatch):
    betas, table = _analytic(monkeypatch, lambda b: -1.0 + (b - 2.5) ** 2 + 1e-8, lambda b: -1.0)
    scan = scan_pair(1.0, 1.0, (SIX_S, SEVEN_F), (0.0, 5.0), 0.5, betas=betas, table=table)
    assert not scan.crossings
    (event,) = scan.near_degeneracies
    assert event.beta == pytest.approx(2.5, abs=1e-4)
    assert event.gap < 1e-6


def test_scan_pair_skips_gaps_and_marks_incomplete(monkeypatch):
    betas, table = _analytic(monkeypatch, lambda b: -1.0 + 0.1 * b, lambda b: -0.77)
    table[5, 0] = np.nan
    scan = scan_pair(1.0, 1.0, (SIX_S, SEVEN_F), (0.0, 5.0), 0.5, betas=betas, table=table)
    assert not scan.complete
    assert len(scan.crossings) == 1


def test_audit_report_frame_is_sorted(monkeypatch):
    betas, table = _analytic(monkeypatch, lambda b: -1.0 + 0.1 * b, lambda b: -0.77)
    scan = scan_pair(1.0, 1.0, (SIX_S, SEVEN_F), (0.0, 5.0), 0.5, betas=betas, table=table)
    report = AuditReport(records=list(scan.crossings))
    frame = report.to_frame()
    assert list(frame.columns) == CROSSING_COLUMNS
    assert frame.loc[0, "state_a"] == "6s" and frame.loc[0, "state_b"] == "7f"


def test_q_sweep_detects_sign_change(monkeypatch):
    def fake_table(params_list, labels, *args, **kwargs):
        return np.array([[-1.0 + 0.1 * p.q, -0.77] for p in params_list])

    monkeypatch.setattr(crossing_utils, "energy_table", fake_table)
    events = q_sweep(1.0, 5.0, [SEVEN_F, SIX_S], np.arange(1.0, 4.01, 0.5))
    assert events == [(SIX_S, SEVEN_F, 2.0, 2.5)]


def test_q_sweep_needs_two_states():
    with pytest.raises(InvalidInputError):
        q_sweep(1.0, 5.0, [SIX_S], [1.0, 2.0])


# ============================================================
# 실제 스펙트럼
# ============================================================

def test_block_energies_coulomb(hydrogen):
    energies = block_energies(hydrogen, 1, 3, DEFAULT_SETTINGS)
    np.testing.assert_allclose(energies, [-1 / 8, -1 / 18, -1 / 32], rtol=1e-6)


def test_scan_levels_frame():
    labels = [parse_state(s) for s in ("1s", "2s", "2p")]
    frame = scan_levels(1.0, 1.0, labels, [0.0, 1.0])
    assert list(frame.columns) == ["1s", "2s", "2p"]
    assert frame.index.name == "beta"
    assert frame.loc[0.0, "2s"] == pytest.approx(frame.loc[0.0, "2p"], rel=1e-7)
    # 같은 ν 에서는 ℓ 이 큰 상태가 더 깊다
    assert frame.loc[1.0, "2p"] < frame.loc[1.0, "2s"]
    assert np.all(frame.diff().iloc[1:] > 0)


def test_scan_levels_requires_labels():
    with pytest.raises(InvalidInputError):
        scan_levels(1.0, 1.0, [], [0.0])


@pytest.mark.slow
@pytest.mark.parametrize("partner", ["7f", "7g", "7i"])
def test_six_s_crosses_seven_shell_once(partner):
    records = find_crossing(1.0, 1.0, (SIX_S, parse_state(partner)), (0.0, 100.0), 1.0, workers=None)
    assert len(records) == 1
    assert records[0].residual < 1e-8
    assert records[0].rule_compliant


@pytest.mark.slow
def test_q2_crossings():
    found = []
    for lower, upper in (("4p", "5g"), ("5p", "6g"), ("6p", "7g")):
        records = find_crossing(1.0, 2.0, (parse_state(lower), parse_state(upper)), (0.0, 100.0), 1.0, workers=None)
        assert len(records) == 1
        assert records[0].residual < 1e-8
        found.append(records[0].beta_star)
    assert any(20.0 <= beta <= 40.0 for beta in found)


@pytest.mark.slow
def test_crossing_scales_with_Z():
    (single,) = find_crossing(1.0, 1.0, (SIX_S, SEVEN_F), (0.0, 100.0), 1.0, workers=None)
    (double,) = find_crossing(2.0, 1.0, (SIX_S, SEVEN_F), (0.0, 50.0), 0.5, workers=None)
    assert double.beta_star == pytest.approx(single.beta_star / 2.0, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("q", [1.0, 2.0])
def test_conjecture_audit(q):
    report = audit_conjecture(1.0, q, 7, (0.0, 100.0), 1.0, workers=None)
    assert report.counterexamples == []
    assert report.records
    for record in report.records:
        assert record.rule_compliant


@pytest.mark.slow
def test_fixed_beta_q_sweep_has_no_crossings():
    labels = [parse_state(s) for s in ("1s", "2s", "2p", "3s", "3p", "3d")]
    assert q_sweep(1.0, 5.0, labels, np.arange(1.0, 6.01, 0.5), workers=None) == []
