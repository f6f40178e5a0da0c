"""Retrieval AP, cross entropy, delta tables, consistency audits, and
deviation reports."""

import math
import random
from decimal import Decimal

import pytest

from phaseforge import (
    BlankInTrack,
    FrameTrack,
    KeyMismatch,
    MissingConsensus,
    NoOverlap,
    NotNormalized,
    PredictionLog,
    UnknownPhase,
    consistency_check,
    cross_entropy,
    delta_table,
    deviation_report,
    eval_report,
    phase_ap,
    round_half_up,
)
from helpers import CHOLEC, oracle_ap, oracle_cross_entropy, random_log


def one_hot_log(truth, c, hot=0.9):
    rows = []
    low = (1.0 - hot) / (c - 1)
    for v in truth:
        row = [low] * c
        row[v] = hot
        rows.append(tuple(row))
    return PredictionLog("k", tuple(rows), normalized=True)


def test_prediction_log_shape_checks():
    with pytest.raises(Exception):
        PredictionLog("k", ())
    with pytest.raises(Exception):
        PredictionLog("k", ((0.5, 0.5), (0.1,)))
    with pytest.raises(Exception):
        PredictionLog("k", ((0.5, float("nan")),))
    with pytest.raises(NotNormalized):
        PredictionLog("k", ((0.5, 0.2),), normalized=True)


def test_phase_ap_hand_case():
    # phase 0 confidences 0.9 > 0.8 > 0.7 > 0.1 rank the frames in order;
    # positives (truth==0) land at ranks 1 and 3: (1/1 + 2/3) / 2 = 5/6
    truth = FrameTrack("k", "t", (0, 1, 0, 1))
    log = PredictionLog("k", (
        (0.9, 0.1),
        (0.8, 0.2),
        (0.7, 0.3),
        (0.1, 0.9),
    ))
    ap = phase_ap(log, truth, 0)
    assert ap == pytest.approx(5 / 6, abs=1e-12)
    assert round(ap, 6) == 0.833333


def test_phase_ap_absent_phase_is_none():
    truth = FrameTrack("k", "t", (0, 0, 0))
    log = random_log(random.Random(1), 3, 2)
    assert phase_ap(log, truth, 1) is None


def test_phase_ap_perfect_ranking():
    truth = FrameTrack("k", "t", (1, 1, 0, 0))
    log = PredictionLog("k", (
        (0.1, 0.9), (0.2, 0.8), (0.8, 0.2), (0.9, 0.1)))
    assert phase_ap(log, truth, 1) == 1.0
    assert phase_ap(log, truth, 0) == 1.0


def test_phase_ap_tie_break_is_frame_order():
    # equal confidences everywhere: ranking is frame order
    truth = FrameTrack("k", "t", (1, 0, 1, 0))
    log = PredictionLog("k", tuple((0.5, 0.5) for _ in range(4)))
    # positives for phase 1 at ranks 1 and 3
    assert phase_ap(log, truth, 1) == pytest.approx(5 / 6, abs=1e-12)


def test_phase_ap_respects_frame_offset_overlap():
    truth = FrameTrack("k", "t", (0, 0, 1, 1, 0, 1))
    log = PredictionLog("k", ((0.2, 0.8), (0.9, 0.1)), frame_offset=2)
    # overlap frames 2..3, truth (1, 1); confidences for 1: 0.8, 0.1
    assert phase_ap(log, truth, 1) == 1.0
    assert phase_ap(log, truth, 0) is None


def test_no_overlap_raises():
    truth = FrameTrack("k", "t", (0, 1))
    log = PredictionLog("k", ((0.5, 0.5),), frame_offset=10)
    with pytest.raises(NoOverlap):
        phase_ap(log, truth, 0)


def test_ap_matches_oracle_on_random_logs():
    rng = random.Random(42)
    for _ in range(300):
        c = rng.choice((2, 7, 27))
        n = rng.randrange(1, 64)
        ids = list(range(c))
        truth = FrameTrack("k", "t", tuple(rng.choice(ids) for _ in range(n)))
        log = random_log(rng, n, c, tie_rate=0.3)
        phase = rng.choice(ids)
        col = [row[phase] for row in log.rows]
        expected = oracle_ap(col, truth.labels, phase)
        got = phase_ap(log, truth, phase)
        if expected is None:
            assert got is None
        else:
            assert got == pytest.approx(expected, abs=1e-12)


def test_cross_entropy_perfect_and_uniform():
    truth = FrameTrack("k", "t", (0, 1, 2))
    perfect = PredictionLog("k", (
        (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)), normalized=True)
    assert cross_entropy(perfect, truth).loss == pytest.approx(0.0, abs=1e-12)

    uniform = PredictionLog(
        "k", tuple((1 / 7,) * 7 for _ in range(5)), normalized=True)
    t7 = FrameTrack("k", "t", (0, 1, 2, 3, 4))
    assert cross_entropy(uniform, t7).loss == pytest.approx(math.log(7), abs=1e-9)


def test_cross_entropy_two_frame_hand_case():
    truth = FrameTrack("k", "t", (0, 1))
    log = PredictionLog("k", ((0.5, 0.5), (0.25, 0.75)), normalized=True)
    expected = -(math.log(0.5) + math.log(0.75)) / 2
    result = cross_entropy(log, truth)
    assert result.loss == pytest.approx(expected, abs=1e-12)
    assert result.loss == pytest.approx(0.4904146265058631, abs=1e-9)
    assert result.evaluated_frames == 2


def test_cross_entropy_clamps_zero_confidence():
    truth = FrameTrack("k", "t", (1,))
    log = PredictionLog("k", ((1.0, 0.0),), normalized=True)
    loss = cross_entropy(log, truth).loss
    assert loss == pytest.approx(-math.log(1e-12), rel=1e-9)
    assert math.isfinite(loss)


def test_cross_entropy_requires_normalized_and_blank_free():
    truth = FrameTrack("k", "t", (0,))
    raw = PredictionLog("k", ((2.0, 1.0),))
    with pytest.raises(NotNormalized):
        cross_entropy(raw, truth)
    log = PredictionLog("k", ((0.5, 0.5),), normalized=True)
    blanky = FrameTrack("k", "t", (None,), provenance="draft")
    with pytest.raises(BlankInTrack):
        cross_entropy(log, blanky)


def test_cross_entropy_matches_oracle():
    rng = random.Random(9)
    for _ in range(100):
        c = rng.choice((2, 7))
        n = rng.randrange(1, 50)
        truth_labels = tuple(rng.randrange(c) for _ in range(n))
        log = random_log(rng, n, c, normalized=True)
        expected = oracle_cross_entropy(log.rows, truth_labels)
        got = cross_entropy(log, FrameTrack("k", "t", truth_labels)).loss
        assert got == pytest.approx(expected, abs=1e-12)


def test_taxonomy_column_mapping_for_nonzero_ids():
    # gastrectomy-style ids starting at 1 map to column id-1
    from helpers import GASTRECTOMY
    truth = FrameTrack("k", "t", (1, 27))
    rows = []
    for v in (1, 27):
        row = [0.0] * 27
        row[GASTRECTOMY.index_of(v)] = 1.0
        rows.append(tuple(row))
    log = PredictionLog("k", tuple(rows), normalized=True)
    assert cross_entropy(log, truth, GASTRECTOMY).loss == pytest.approx(0.0)
    assert phase_ap(log, truth, 1, GASTRECTOMY) == 1.0
    with pytest.raises(UnknownPhase):
        phase_ap(log, truth, 99, GASTRECTOMY)


def test_eval_report_confusion_and_support():
    truth = FrameTrack("k", "t", (0, 0, 1, 2))
    log = one_hot_log((0, 1, 1, 2), 7)
    report = eval_report(log, truth, CHOLEC)
    assert report.support == {0: 2, 1: 1, 2: 1, 3: 0, 4: 0, 5: 0, 6: 0}
    assert report.confusion[0][0] == 1
    assert report.confusion[0][1] == 1
    assert report.confusion[1][1] == 1
    assert report.confusion[2][2] == 1
    assert report.per_phase_ap[3] is None
    defined = [v for v in report.per_phase_ap.values() if v is not None]
    assert report.map_value == pytest.approx(sum(defined) / len(defined))


def test_eval_report_argmax_tie_goes_to_lowest_phase_id():
    truth = FrameTrack("k", "t", (4,))
    log = PredictionLog("k", ((0.2, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1),))
    report = eval_report(log, truth, CHOLEC)
    # five-way tie on columns 0..4 -> predicted phase 0
    assert report.confusion[CHOLEC.index_of(4)][CHOLEC.index_of(0)] == 1


def test_delta_table_exact_arithmetic():
    results = {
        ("m", "s", "Ann1"): 65.07,
        ("m", "s", "Ann2"): 62.46,
        ("m", "s", "Con"): 67.56,
    }
    table = delta_table(results)
    row = table.rows[0]
    assert row.deltas["Ann1"] == Decimal("2.49")
    # exactness: ap + delta == consensus exactly, no float fuzz
    for ann, d in row.deltas.items():
        assert row.ap_by_annotation[ann] + d == row.consensus_ap
    assert table.display_delta("m", "s", "Ann1") == "+2.49"
    assert table.display_delta("m", "s", "Ann2") == "+5.10"


def test_delta_table_signs_and_zero():
    results = {
        ("m", "s", "Ann1"): 70.0,
        ("m", "s", "Ann2"): 67.56,
        ("m", "s", "Con"): 67.56,
    }
    table = delta_table(results)
    assert table.display_delta("m", "s", "Ann1") == "-2.44"
    assert table.display_delta("m", "s", "Ann2") == "+0.00"


def test_delta_table_requires_consensus_column():
    with pytest.raises(MissingConsensus):
        delta_table({("m", "s", "Ann1"): 1.0})


def test_round_half_up_behavior():
    assert round_half_up(2.485) == Decimal("2.49")
    assert round_half_up(2.445) == Decimal("2.45")
    assert round_half_up(-2.485) == Decimal("-2.49")
    assert round_half_up(2.0) == Decimal("2.00")


def test_consistency_check_hand_cases():
    res = consistency_check([65.8, 59.2, 51.1, 51.7, 70.9, 67.8], 61.1, 0.15)
    assert res.derived_map == pytest.approx(61.0833, abs=1e-4)
    assert res.consistent
    res = consistency_check([72.9, 60.6, 57.1, 46.3, 72.9, 62.9], 67.6, 0.15)
    assert res.derived_map == pytest.approx(62.1167, abs=1e-4)
    assert not res.consistent
    assert consistency_check([5.0], 5.0, 0.0).consistent


def test_deviation_report_symmetry():
    aps = {
        "m1": {"k1": 60.0, "k2": 50.0},
        "m2": {"k1": 70.0, "k2": 50.0},
    }
    report = deviation_report(aps)
    entry = report.per_key["k1"]
    assert entry.total_ap == Decimal("65")
    assert entry.deviations["m1"] == Decimal("-5")
    assert entry.deviations["m2"] == Decimal("5")
    assert report.per_key["k2"].deviations["m1"] == Decimal("0")


def test_deviation_report_single_model_all_zero():
    report = deviation_report({"m": {"a": 1.0, "b": 2.0}})
    assert all(
        e.deviations["m"] == Decimal("0") for e in report.per_key.values())


def test_deviation_report_ragged_keys_raise():
    with pytest.raises(KeyMismatch):
        deviation_report({"m1": {"a": 1.0}, "m2": {"b": 1.0}})


def test_map_invariant_under_monotone_confidence_rescale():
    rng = random.Random(3)
    truth = FrameTrack("k", "t", tuple(rng.randrange(7) for _ in range(40)))
    log = random_log(rng, 40, 7)
    base = eval_report(log, truth, CHOLEC)
    squashed = PredictionLog(
        "k",
        tuple(tuple(v ** 3 for v in row) for row in log.rows),
    )
    again = eval_report(squashed, truth, CHOLEC)
    for pid in CHOLEC.ids:
        a, b = base.per_phase_ap[pid], again.per_phase_ap[pid]
        if a is None:
            assert b is None
        else:
            assert b == pytest.approx(a, abs=1e-12)
