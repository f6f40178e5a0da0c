"""Bundled reference data: names, shapes, and spot values."""

import pytest

from phaseforge import (
    FIXTURE_NAMES,
    MODELS,
    NotFound,
    PhaseKind,
    PhaseTaxonomy,
    load_fixture,
)


def test_fixture_names_are_stable():
    assert FIXTURE_NAMES == (
        "cholec_taxonomy",
        "gastrectomy_taxonomy",
        "table1_aps",
        "table2_aps",
        "supp_table3_aps",
    )
    for name in FIXTURE_NAMES:
        assert load_fixture(name) is not None


def test_unknown_fixture_lists_available():
    with pytest.raises(NotFound) as err:
        load_fixture("bogus")
    assert "cholec_taxonomy" in str(err.value)


def test_cholec_taxonomy_shape():
    tax = load_fixture("cholec_taxonomy")
    assert isinstance(tax, PhaseTaxonomy)
    assert tax.surgery_kind == "cholecystectomy"
    assert tax.phase_count == 7
    assert tax.ids == frozenset(range(7))
    assert tax.phase(0).name == "preparation"
    assert tax.phase(6).name == "gallbladder retraction"
    assert all(p.kind is PhaseKind.SURGICAL for p in tax.phases)


def test_gastrectomy_taxonomy_shape():
    tax = load_fixture("gastrectomy_taxonomy")
    assert tax.surgery_kind == "gastrectomy"
    assert tax.phase_count == 27
    assert tax.ids == frozenset(range(1, 28))
    assert tax.phase(18).name == "Gastric transection"
    kinds = {p.id: p.kind for p in tax.phases}
    assert kinds[1] is PhaseKind.SURGICAL
    assert kinds[21] is PhaseKind.SURGICAL
    assert kinds[22] is PhaseKind.NON_SURGICAL
    assert kinds[27] is PhaseKind.NON_SURGICAL


def test_table1_shape_and_values():
    table = load_fixture("table1_aps")
    assert set(table) == set(MODELS)
    for model, by_ann in table.items():
        assert set(by_ann) == {"Ann1", "Ann2", "Ann3"}
        for entry in by_ann.values():
            assert set(entry) == {"splits", "reported_map"}
            assert set(entry["splits"]) == {f"Split{k}" for k in range(1, 7)}
            for v in entry["splits"].values():
                assert 0.0 <= v <= 100.0
    first = table["2D-CNN-LSTM"]["Ann1"]
    assert tuple(first["splits"][f"Split{k}"] for k in range(1, 7)) == (
        65.8, 59.2, 51.1, 51.7, 70.9, 67.8)
    assert first["reported_map"] == 61.1
    assert table["3D-ResNet"]["Ann3"]["reported_map"] == 67.6


def test_table2_shape_and_spot_value():
    table = load_fixture("table2_aps")
    assert set(k[0] for k in table) == set(MODELS)
    assert set(k[1] for k in table) == {f"Split{k}" for k in range(1, 4)}
    assert set(k[2] for k in table) == {"Ann1", "Ann2", "Ann3", "Ann4", "Con"}
    assert len(table) == 3 * 3 * 5
    assert table[("2D-CNN-LSTM", "Split3", "Con")] == 71.64
    assert table[("2D-CNN-LSTM", "Split1", "Ann1")] == 65.07
    assert table[("2D-CNN-LSTM", "Split1", "Con")] == 67.56
    assert table[("3D-ResNet", "Split2", "Ann4")] == 62.46
    assert table[("3D-ResNet", "Split2", "Con")] == 69.95


def test_supp_table3_shape():
    table = load_fixture("supp_table3_aps")
    assert set(table) == {"cholecystectomy", "gastrectomy"}
    cholec = load_fixture("cholec_taxonomy")
    gast = load_fixture("gastrectomy_taxonomy")
    for model in MODELS:
        assert set(table["cholecystectomy"][model]) == set(cholec.ids)
        assert set(table["gastrectomy"][model]) == set(gast.ids)
    assert table["cholecystectomy"]["ECO"][4] == 69.2
    assert table["gastrectomy"]["3D-ResNet"][18] == 90.1


def test_fixture_loads_are_independent_copies():
    a = load_fixture("table2_aps")
    a[("2D-CNN-LSTM", "Split3", "Con")] = -1.0
    b = load_fixture("table2_aps")
    assert b[("2D-CNN-LSTM", "Split3", "Con")] == 71.64
