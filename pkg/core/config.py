from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    app_name: str = "contractum"
    environment: str = Field(default="development")

    # Tolerances
    tol: float = Field(default=1e-12, gt=0)  # equality tolerance
    margin: float = Field(default=1e-9, gt=0)  # strict inequalities must clear this
    denominator_guard: float = Field(default=1e-9, gt=0)

    # Sampling defaults for control-function checks
    grid_max: float = 2.0
    grid_step: float = 1e-3
    mt_window: float = 0.1
    approach_depth: int = 40
    max_sample_points: int = Field(default=200_000, gt=0)  # cap on gridded samples

    # Iteration
    eps_fp: float = 1e-9
    max_steps: int = 10_000
    min_trace_len: int = 10

    # Hausdorff embedding
    embed_cap: float = 10.0

    # Summability
    min_phi_terms: int = 100
    exponent_margin: float = 0.05

    # Fan-out over samples
    workers: int = 1

    # Reports
    report_schema: str = "v1"
    log_level: str = "INFO"

    model_config = {
        "env_file": ".env",
        "env_prefix": "CONTRACTUM_",
        "case_sensitive": False,
        "extra": "ignore",
    }


settings = Settings()
