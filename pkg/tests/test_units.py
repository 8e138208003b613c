import pytest

from dwkit.errors import UnitError
from dwkit.units import (parse_bytes, parse_quantity, parse_rate,
                         parse_seconds, parse_watts)


class TestParsing:
    def test_decimal_prefixes(self):
        assert parse_bytes("2GB") == 2e9
        assert parse_bytes("8GB") == 8e9
        assert parse_bytes("1kB") == 1e3
        assert parse_bytes("1KB") == 1e3
        assert parse_bytes("3MB") == 3e6
        assert parse_bytes("1.5TB") == 1.5e12
        assert parse_bytes("0.25PB") == 0.25e15

    def test_rates(self):
        assert parse_rate("50GB/s") == 50e9
        assert parse_rate("2.5MB/s") == 2.5e6
        assert parse_rate("100B/s") == 100.0

    def test_seconds(self):
        assert parse_seconds("3600s") == 3600.0
        assert parse_seconds("10sec") == 10.0
        assert parse_seconds("1ks") == 1000.0

    def test_watts(self):
        assert parse_watts("299W") == 299.0
        assert parse_watts("1.2kW") == 1200.0

    def test_bare_numbers_are_base_units(self):
        assert parse_bytes("123") == 123.0
        assert parse_bytes(2e9) == 2e9
        assert parse_seconds(3600) == 3600.0

    def test_scientific_notation_and_whitespace(self):
        assert parse_bytes("2e9B") == 2e9
        assert parse_bytes("  2 GB ") == 2e9
        assert parse_bytes("-1.5kB") == -1500.0


class TestRejection:
    @pytest.mark.parametrize("text", ["2GiB", "1MiB", "3KiB", "1TiB/s",
                                      "5PiB"])
    def test_binary_prefixes_rejected(self, text):
        with pytest.raises(UnitError):
            parse_quantity(text, "bytes")

    def test_wrong_dimension(self):
        with pytest.raises(UnitError):
            parse_seconds("2GB")
        with pytest.raises(UnitError):
            parse_bytes("2GB/s")
        with pytest.raises(UnitError):
            parse_rate("3600s")

    def test_garbage(self):
        for bad in ["", "GB", "fast", "1..2GB", "2 giga bytes"]:
            with pytest.raises(UnitError):
                parse_bytes(bad)

    def test_unknown_dimension_unit(self):
        with pytest.raises(UnitError):
            parse_quantity("2X", "bytes")
