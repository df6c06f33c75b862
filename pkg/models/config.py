from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator


class RunConfig(BaseModel):
    """Paths and switches collected from the command line."""

    robot: Optional[Path] = None
    map: Optional[Path] = None
    scenario: Optional[Path] = None
    out_dir: Path = Path("out")
    seed: int = Field(default=0, ge=0, lt=2**64)
    emit_svg: bool = False

    @field_validator("robot", "map", "scenario")
    @classmethod
    def _exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"file not found: {value}")
        return value
