import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from core.errors import ConfigError, InvalidArgumentError

ModelT = TypeVar("ModelT", bound=BaseModel)


def normalize_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def as_vector(values, length: Optional[int] = None, name: str = "vector") -> np.ndarray:
    array = np.asarray(values, dtype=float).reshape(-1)
    if length is not None and array.shape[0] != length:
        raise InvalidArgumentError(f"{name} has {array.shape[0]} entries, expected {length}")
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return array


def parse_floats(text: str) -> list:
    """'0.1, 0.2,0' -> [0.1, 0.2, 0.0]"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list '{text}'", "argument") from exc


def format_validation_error(exc: ValidationError) -> str:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    return f"{location}: {first['msg']}"


def load_model(path, model: Type[ModelT]) -> ModelT:
    """Read a JSON file into a pydantic model, reporting the failing line or field."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(exc.strerror or exc), str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc), str(path)) from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(value)) for value in row])
    return path


def dump_json(data, path=None) -> str:
    text = json.dumps(data, indent=2, sort_keys=True)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
    return text
