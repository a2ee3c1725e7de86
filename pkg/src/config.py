"""
src/config.py
Loads settings from config/config.yaml and makes them
available to every other file in the project.
Environment variables (or a .env file) prefixed with MIPP_ override
YAML values, e.g. MIPP_SIMULATION__WORKERS=4.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

CONFIG_PATH = Path(__file__).parent.parent / "config" / "config.yaml"


class LoggingConfig(BaseModel):
    level: str = "INFO"
    format: str = "{time:HH:mm:ss} | {level: <8} | {message}"


class NumericsConfig(BaseModel):
    tol: float = 1e-8
    eps: float = 1e-10
    h: float = 1e-3
    x_max: float = 20.0
    max_support: int = 200_000
    pmf_block_elements: int = 4_194_304
    max_terms: int = 400
    bessel_switch: float = 25.0
    lambda_one_threshold: float = 1e-8


class SimulationConfig(BaseModel):
    n_paths: int = 100_000
    master_seed: int = 42
    barrier_eps: float = 1e-4
    horizon_cap_factor: float = 1e6
    workers: int = 1
    chunk_size: int = 5000
    bridge_depth: int = 48
    barrier_grid_h: float = 1e-3
    barrier_x_max: float = 60.0
    validation_ruin_paths: int = 200_000


class OutputConfig(BaseModel):
    directory: str = "data/"
    float_digits: int = 17


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="MIPP_",
        env_nested_delimiter="__",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
        yaml_file=CONFIG_PATH,
    )
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Earlier sources win: explicit kwargs, then env, then .env, then YAML.
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            YamlConfigSettingsSource(settings_cls),
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
