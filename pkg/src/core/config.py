from functools import lru_cache
from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Outputs
    OUTPUT_DIR: str = "runs"
    # Tensor engine
    DEFAULT_DTYPE: Literal["float64", "float32"] = "float64"
    CHECK_FINITE: bool = True
    ENABLE_MAC_COUNTER: bool = True
    # Evaluation
    EVAL_WORKERS: int = 1

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="SEGKIT_", extra="ignore"
    )


@lru_cache()
def get_config() -> Settings:
    return Settings()


env_settings = get_config()
