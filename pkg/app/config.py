"""
Configuration management for the Nielsen Orbit Lab.
Handles environment variables and default experiment parameters.
"""

from typing import Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="LAB_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "Nielsen Orbit Lab"
    app_version: str = "1.0.0"
    environment: str = "development"
    debug: bool = False

    # Server
    host: str = "127.0.0.1"
    port: int = 8000

    # Local field defaults
    field_kind: str = "padic"
    prime: int = 5
    precision: int = 32

    # Abstract tree defaults
    tree_degree: int = 2
    tree_depth: int = 12
    max_portrait_vertices: int = 2_000_000

    # Experiments
    tuple_size: int = 3
    trials: int = 200
    word_length: int = 6
    nd_level: int = 1
    seed: int = 0
    workers: int = 1
    length_law: float = 0.5
    max_translation: int = 3

    # Search budgets
    reduction_budget: int = 10_000
    scan_radius: int = 6
    max_census_tuples: int = 5_000_000
    large_census_tuples: int = 50_000_000

    # Logging
    log_level: str = "INFO"
    log_format: str = "json"

    @field_validator("debug", mode="before")
    @classmethod
    def parse_debug(cls, v):
        """Parse debug flag from string."""
        if isinstance(v, str):
            return v.lower() in ("true", "1", "yes", "on")
        return v

    @field_validator("field_kind", "log_format", mode="before")
    @classmethod
    def normalize_choice(cls, v):
        """Normalize enumerated string settings."""
        if isinstance(v, str):
            return v.strip().lower()
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """Upper-case the log level name."""
        if isinstance(v, str):
            return v.strip().upper()
        return v


# Global settings instance (lazy initialization)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get application settings."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
