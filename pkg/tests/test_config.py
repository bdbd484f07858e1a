"""Tests for settings, cap resolution and the instance-file models."""
import pytest
from pydantic import ValidationError

from sa2_decide.algebra import SL2, Instance, SA2Element
from sa2_decide.config import Settings, get_settings, resolve_caps
from sa2_decide.models import Caps, InstanceFile


@pytest.fixture
def clean_settings(monkeypatch):
    monkeypatch.delenv("SA2_DECIDE_CAPS", raising=False)
    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()


class TestSettings:
    """Tests for Settings and resolve_caps."""

    def test_defaults(self, clean_settings):
        """Test default caps apply when nothing is configured."""
        assert resolve_caps() == Caps()
        assert Caps().subset_cap == 16

    def test_env_caps(self, clean_settings):
        """Test caps can be set as JSON in the environment."""
        clean_settings.setenv("SA2_DECIDE_CAPS", '{"depth": 5, "norm": 99}')

        caps = get_settings().caps
        assert caps.depth == 5
        assert caps.norm == 99
        assert caps.closure == Caps().closure

    def test_precedence(self, clean_settings):
        """Test overrides beat file caps, which beat settings."""
        clean_settings.setenv("SA2_DECIDE_CAPS", '{"depth": 5, "norm": 99, "closure": 7}')
        file_caps = Caps(depth=6, norm=50)

        caps = resolve_caps(file_caps, depth=9, norm=None)
        assert caps.depth == 9
        assert caps.norm == 50
        assert caps.closure == 7

    def test_log_level(self, clean_settings):
        """Test the log level is read from the prefixed variable."""
        clean_settings.setenv("SA2_DECIDE_LOG_LEVEL", "DEBUG")

        assert Settings().log_level == "DEBUG"

    def test_caps_are_checked(self):
        """Test negative or unknown caps are rejected."""
        with pytest.raises(ValidationError):
            Caps(depth=-1)
        with pytest.raises(ValidationError):
            Caps(width=3)


class TestInstanceFile:
    """Tests for InstanceFile and GeneratorSpec."""

    def test_to_instance(self):
        """Test a parsed document becomes an instance."""
        document = InstanceFile.model_validate(
            {"generators": [{"A": [[1, 1], [0, 1]], "a": [0, "7"]}], "caps": {"depth": 3}}
        )

        assert document.to_instance() == Instance((SA2Element(SL2(1, 1, 0, 1), (0, 7)),))
        assert document.caps.depth == 3

    def test_large_entries_dump_as_strings(self):
        """Test integers beyond double precision are written as strings."""
        big = 10**20
        document = InstanceFile.from_instance(Instance((SA2Element(SL2.identity(), (big, 1)),)))
        dumped = document.model_dump(mode="json")

        assert dumped["generators"][0]["a"] == [str(big), 1]
        assert InstanceFile.model_validate(dumped).to_instance().generators[0].a == (big, 1)

    @pytest.mark.parametrize(
        "generator",
        [
            {"A": [[1, 0, 0], [0, 1]], "a": [0, 0]},
            {"A": [[1, 0], [0, 1]], "a": [0]},
            {"A": [[1, 2], [3, 4]], "a": [0, 0]},
            {"A": [[1, 0], [0, 1]], "a": ["one", 0]},
        ],
    )
    def test_rejects_malformed_generators(self, generator):
        """Test shape, determinant and entry type are checked."""
        with pytest.raises(ValidationError):
            InstanceFile.model_validate({"generators": [generator]})
