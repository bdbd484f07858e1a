"""Configuration management using environment variables."""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .models import Caps


class Settings(BaseSettings):
    """Application settings loaded from environment variables and an optional .env file."""

    model_config = SettingsConfigDict(
        env_prefix="SA2_DECIDE_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # Default search caps, as JSON in SA2_DECIDE_CAPS (same schema as an instance file's "caps")
    caps: Caps = Field(default_factory=Caps)

    # Root logger level for the CLI; -v / -vv override it
    log_level: str = "WARNING"

    # Instances validated at once by the corpus runner
    corpus_concurrency: int = 4

    # Translation entries of random corpus instances lie in [-bound, bound]
    corpus_entry_bound: int = 2


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def resolve_caps(file_caps: Caps | None = None, **overrides: int | None) -> Caps:
    """
    Merge caps by precedence: explicit overrides, then instance-file caps, then settings.

    Args:
        file_caps: Caps from an instance file, if present
        overrides: Individual cap fields from the command line; None means unset

    Returns:
        Effective caps
    """
    merged = get_settings().caps.model_dump()
    if file_caps is not None:
        merged.update(file_caps.model_dump(include=file_caps.model_fields_set))
    merged.update({name: value for name, value in overrides.items() if value is not None})
    return Caps(**merged)
