import pytest

from banditeval import (DimensionMismatch, ParseError, load_dataset,
                        rng_stream, save_dataset, simulate_log)
from banditeval.windows import make_multipool_dataset


class TestRoundTrip:
    def test_synthetic_log_bit_exact(self, model, tmp_path):
        log = simulate_log(model, 1000, rng_stream(400))
        path = tmp_path / "log.txt"
        save_dataset(log, path)
        loaded = load_dataset(path)
        assert loaded == log

    def test_pools_roundtrip(self, tmp_path):
        ds, _ = make_multipool_dataset(rng_stream(401), segments=3,
                                       segment_len=20, pool_size=4)
        path = tmp_path / "pooled.txt"
        save_dataset(ds, path)
        assert load_dataset(path) == ds

    def test_logging_tag_roundtrip(self, model, tmp_path):
        log = simulate_log(model, 10, rng_stream(402))
        log.logging = "unknown"
        path = tmp_path / "log.txt"
        save_dataset(log, path)
        assert load_dataset(path).logging == "unknown"


class TestParseErrors:
    def test_short_record_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("d=15 k=10 logging=uniform\n"
                        "1 0 " + " ".join(["0.0"] * 14) + "\n")
        with pytest.raises(ParseError, match="line 2"):
            load_dataset(path)

    def test_action_out_of_range_is_dimension_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("d=2 k=10 logging=uniform\n"
                        "1 10 0.0 0.0\n")
        with pytest.raises(DimensionMismatch):
            load_dataset(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("dims=2 k=3\n")
        with pytest.raises(ParseError, match="line 1"):
            load_dataset(path)

    def test_non_numeric_context(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("d=2 k=3 logging=uniform\n1 0 0.5 oops\n")
        with pytest.raises(ParseError, match="line 2"):
            load_dataset(path)

    def test_bad_pool_field(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("d=1 k=3 logging=uniform\n1 0 0.5 pool=0,x\n")
        with pytest.raises(ParseError, match="pool"):
            load_dataset(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        with pytest.raises(ParseError):
            load_dataset(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("d=2 k=3 logging=uniform\n")
        with pytest.raises(ParseError, match="no records"):
            load_dataset(path)
