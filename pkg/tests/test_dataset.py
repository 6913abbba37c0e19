import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embnum.dataset import (
    Dataset,
    FamilySpec,
    NumericAttribute,
    SyntheticSpec,
    dataset_fingerprint,
    default_family_pool,
    format_value,
    generate_synthetic,
    load_attribute_csv,
    load_dataset,
    spec_from_json,
    split_half,
    split_holdout,
    worker_count,
    write_dataset,
)
from embnum.errors import (
    EmptyAttribute,
    InvalidSpec,
    MalformedValue,
    MissingDirectory,
    UnknownSource,
)


def tiny_dataset() -> Dataset:
    attrs = [
        NumericAttribute(values=[1.0, 2.0], label="height", source="s0"),
        NumericAttribute(values=[3.5], label="weight", source="s0"),
        NumericAttribute(values=[2.0, 2.0, 9.0], label="height", source="s1"),
        NumericAttribute(values=[-4.25, 0.125], label="weight", source="s1"),
    ]
    return Dataset.from_attributes(attrs)


class TestNumericAttribute:
    def test_validates_on_construction(self):
        with pytest.raises(EmptyAttribute):
            NumericAttribute(values=[], label="a", source="s")
        with pytest.raises(MalformedValue):
            NumericAttribute(values=[1.0, float("nan")], label="a", source="s")
        with pytest.raises(MalformedValue):
            NumericAttribute(values=[1.0], label="", source="s")

    def test_equality_covers_values_and_identity(self):
        a = NumericAttribute(values=[1.0, 2.0], label="x", source="s")
        b = NumericAttribute(values=[1.0, 2.0], label="x", source="s")
        c = NumericAttribute(values=[1.0, 2.5], label="x", source="s")
        assert a == b
        assert a != c
        assert a != NumericAttribute(values=[1.0, 2.0], label="x", source="t")


class TestDatasetInvariants:
    def test_duplicate_source_label_rejected(self):
        a = NumericAttribute(values=[1.0], label="x", source="s")
        b = NumericAttribute(values=[2.0], label="x", source="s")
        with pytest.raises(MalformedValue):
            Dataset.from_attributes([a, b])

    def test_undeclared_source_rejected(self):
        a = NumericAttribute(values=[1.0], label="x", source="s")
        with pytest.raises(MalformedValue):
            Dataset(sources=["other"], labels=["x"], attributes=[a])

    def test_equality_is_order_insensitive(self):
        d1 = tiny_dataset()
        d2 = Dataset.from_attributes(list(reversed(d1.attributes)))
        assert d1 == d2

    def test_by_source(self):
        d = tiny_dataset()
        got = d.by_source("s1")
        assert sorted(a.label for a in got) == ["height", "weight"]


class TestRoundTrip:
    def test_write_then_load_is_identity(self, tmp_path):
        d = tiny_dataset()
        write_dataset(d, tmp_path / "data")
        loaded = load_dataset(tmp_path / "data")
        assert loaded == d

    def test_layout_one_csv_per_attribute(self, tmp_path):
        write_dataset(tiny_dataset(), tmp_path / "data")
        files = sorted(p.relative_to(tmp_path / "data").as_posix()
                       for p in (tmp_path / "data").rglob("*.csv"))
        assert files == [
            "s0/height.csv", "s0/weight.csv", "s1/height.csv", "s1/weight.csv",
        ]

    def test_fingerprint_stable_under_attribute_order(self, tmp_path):
        d1 = tiny_dataset()
        d2 = Dataset.from_attributes(list(reversed(d1.attributes)))
        assert dataset_fingerprint(d1) == dataset_fingerprint(d2)

    def test_fingerprint_sensitive_to_values(self):
        d1 = tiny_dataset()
        attrs = [NumericAttribute(values=a.values.copy(), label=a.label, source=a.source)
                 for a in d1.attributes]
        attrs[0].values[0] += 1e-9
        d2 = Dataset.from_attributes(attrs)
        assert dataset_fingerprint(d1) != dataset_fingerprint(d2)

    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                              min_value=-1e12, max_value=1e12),
                    min_size=1, max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_format_value_parses_back_exactly(self, values):
        for v in values:
            assert float(format_value(v)) == v

    def test_format_value_prefers_integer_form(self):
        assert format_value(3.0) == "3"
        assert format_value(-17.0) == "-17"
        assert format_value(0.1) == "0.1"


class TestParsing:
    def test_missing_root(self, tmp_path):
        with pytest.raises(MissingDirectory):
            load_dataset(tmp_path / "nope")

    def test_root_without_sources(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(MissingDirectory):
            load_dataset(tmp_path / "empty")

    def test_sources_without_files(self, tmp_path):
        (tmp_path / "d" / "s0").mkdir(parents=True)
        with pytest.raises(MissingDirectory):
            load_dataset(tmp_path / "d")

    def test_malformed_token_reports_path_and_line(self, tmp_path):
        src = tmp_path / "d" / "s0"
        src.mkdir(parents=True)
        (src / "x.csv").write_text("1.5\nbanana\n2.0\n")
        with pytest.raises(MalformedValue) as exc:
            load_dataset(tmp_path / "d")
        assert "x.csv:2" in str(exc.value)
        assert "banana" in str(exc.value)

    def test_non_finite_token_rejected(self, tmp_path):
        src = tmp_path / "d" / "s0"
        src.mkdir(parents=True)
        (src / "x.csv").write_text("inf\n")
        with pytest.raises(MalformedValue) as exc:
            load_dataset(tmp_path / "d")
        assert "x.csv:1" in str(exc.value)

    def test_blank_lines_skipped(self, tmp_path):
        src = tmp_path / "d" / "s0"
        src.mkdir(parents=True)
        (src / "x.csv").write_text("\n1.5\n\n  \n2.5\n\n")
        d = load_dataset(tmp_path / "d")
        assert d.attributes[0].values.tolist() == [1.5, 2.5]

    def test_all_blank_file_is_empty_attribute(self, tmp_path):
        src = tmp_path / "d" / "s0"
        src.mkdir(parents=True)
        (src / "x.csv").write_text("\n\n")
        with pytest.raises(EmptyAttribute):
            load_dataset(tmp_path / "d")

    def test_scientific_notation_accepted(self, tmp_path):
        src = tmp_path / "d" / "s0"
        src.mkdir(parents=True)
        (src / "x.csv").write_text("1e3\n-2.5E-4\n+7.0\n")
        d = load_dataset(tmp_path / "d")
        assert d.attributes[0].values.tolist() == [1000.0, -0.00025, 7.0]

    def test_load_attribute_csv(self, tmp_path):
        p = tmp_path / "col.csv"
        p.write_text("4\n5\n")
        attr = load_attribute_csv(p)
        assert attr.values.tolist() == [4.0, 5.0]
        assert attr.label == "col"
        assert attr.source == "query"
        with pytest.raises(MissingDirectory):
            load_attribute_csv(tmp_path / "absent.csv")


class TestWorkerCount:
    def test_env_override_caps_workers(self, monkeypatch):
        monkeypatch.setenv("EMBNUM_THREADS", "2")
        assert worker_count() <= 2
        monkeypatch.setenv("EMBNUM_THREADS", "bogus")
        assert worker_count() >= 1
        monkeypatch.setenv("EMBNUM_THREADS", "10000")
        assert worker_count() <= 8


class TestSynthetic:
    def test_shape_and_names(self):
        spec = SyntheticSpec(label_count=3, source_count=2, rows_min=5,
                             rows_max=9, seed=1)
        d = generate_synthetic(spec)
        assert d.labels == ["y00", "y01", "y02"]
        assert d.sources == ["s0", "s1"]
        assert len(d.attributes) == 6
        for a in d.attributes:
            assert 5 <= a.values.size <= 9

    def test_determinism_and_seed_sensitivity(self):
        spec = SyntheticSpec(label_count=2, source_count=2, rows_min=4,
                             rows_max=4, seed=5)
        assert generate_synthetic(spec) == generate_synthetic(spec)
        other = SyntheticSpec(label_count=2, source_count=2, rows_min=4,
                              rows_max=4, seed=6)
        assert generate_synthetic(spec) != generate_synthetic(other)

    def test_default_pool_covers_labels(self):
        pool = default_family_pool(12)
        assert len(pool) == 12
        assert len({(f.family, f.location) for f in pool}) == 12

    def test_spec_validation(self):
        with pytest.raises(InvalidSpec):
            SyntheticSpec(label_count=0, source_count=1, rows_min=1, rows_max=1)
        with pytest.raises(InvalidSpec):
            SyntheticSpec(label_count=1, source_count=1, rows_min=5, rows_max=4)
        with pytest.raises(InvalidSpec):
            SyntheticSpec(label_count=3, source_count=1, rows_min=1, rows_max=1,
                          family_pool=(FamilySpec(family="normal"),))
        with pytest.raises(InvalidSpec):
            FamilySpec(family="zeta")
        with pytest.raises(InvalidSpec):
            FamilySpec(family="normal", scale=0.0)

    def test_spec_from_json_round_trip(self):
        text = """
        {"label_count": 2, "source_count": 3, "rows_min": 4, "rows_max": 8,
         "seed": 9,
         "family_pool": [{"family": "normal", "scale": 2.0},
                          {"family": "uniform", "location": 5.0}]}
        """
        spec = spec_from_json(text)
        assert spec.label_count == 2
        assert spec.source_count == 3
        assert spec.seed == 9
        assert spec.family_pool[0] == FamilySpec(family="normal", scale=2.0)
        assert spec.family_pool[1].location == 5.0

    def test_spec_from_json_errors(self):
        with pytest.raises(InvalidSpec):
            spec_from_json("not json")
        with pytest.raises(InvalidSpec):
            spec_from_json("[1,2]")
        with pytest.raises(InvalidSpec):
            spec_from_json('{"label_count": 1}')
        with pytest.raises(InvalidSpec):
            spec_from_json(
                '{"label_count": 1, "source_count": 1, "rows_min": 1,'
                ' "rows_max": 1, "family_pool": [{"famly": "normal"}]}'
            )


class TestSplits:
    def test_holdout_partitions_by_source(self):
        d = tiny_dataset()
        labeled, queries = split_holdout(d, "s1")
        assert labeled.sources == ["s0"]
        assert queries.sources == ["s1"]
        assert len(labeled.attributes) + len(queries.attributes) == len(d.attributes)

    def test_holdout_unknown_source(self):
        with pytest.raises(UnknownSource):
            split_holdout(tiny_dataset(), "s9")

    def test_half_split_is_a_partition(self):
        spec = SyntheticSpec(label_count=4, source_count=6, rows_min=3,
                             rows_max=5, seed=2)
        d = generate_synthetic(spec)
        a, b = split_half(d, axis="source", seed=3)
        assert set(a.sources).isdisjoint(b.sources)
        assert set(a.sources) | set(b.sources) == set(d.sources)
        assert len(a.attributes) + len(b.attributes) == len(d.attributes)
        a2, b2 = split_half(d, axis="source", seed=3)
        assert a == a2 and b == b2

    def test_half_split_by_label(self):
        d = tiny_dataset()
        a, b = split_half(d, axis="label", seed=0)
        assert set(a.labels).isdisjoint(b.labels)
        assert set(a.labels) | set(b.labels) == {"height", "weight"}

    def test_half_split_axis_validation(self):
        with pytest.raises(InvalidSpec):
            split_half(tiny_dataset(), axis="rows")
