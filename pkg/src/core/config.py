from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """Process-wide settings. Every CLI flag can be overridden with a SLUNG_* variable."""

    APP_NAME: str = "Slung Payload Planner"
    VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"  # production, development, or testing

    # Logging
    LOG_LEVEL: str = "INFO"

    # Run overrides (None means: take the value from the scenario file)
    SCENARIO: Optional[str] = None
    VARIANT: Optional[str] = None
    PARTICLES: Optional[int] = None
    ITERS: Optional[int] = None
    SEED: Optional[int] = None
    DT: Optional[float] = None
    HORIZON: Optional[float] = None
    OUT: str = "out"

    # Parallel fitness evaluation; 0 runs the swarm sequentially
    WORKERS: int = 0

    # Timestep presets
    VALIDATION_DT: float = 1e-3
    TUNING_DT: float = 1e-2

    # Slow end-to-end tests
    RUN_SLOW: bool = False

    model_config = SettingsConfigDict(
        env_prefix="SLUNG_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
