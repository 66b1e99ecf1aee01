"""
Core configuration system.
Settings come from defaults, THOR2_* environment variables, an optional YAML file
and command-line overrides, in increasing priority.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from thor2.core.exceptions import ConfigException


class ColorspaceSettings(BaseModel):
    """Colour conversion and lens parameters"""

    illuminant: str = "D65"
    observer: Literal["2", "10"] = "2"
    xi: float = math.pi / 8
    hue_epsilon: float = Field(0.5, ge=0.0)


class MapperSettings(BaseModel):
    """Sampling grid, cover and clustering parameters of the colour network"""

    stride: int = Field(8, gt=0)
    n_intervals_chroma: int = Field(3, ge=1)
    n_intervals_hue: int = Field(8, ge=1)
    gain_chroma: float = Field(10.0, ge=0.0, lt=100.0)
    gain_hue: float = Field(25.0, ge=0.0, lt=100.0)
    dbscan_eps: float = Field(8.0, gt=0.0)
    dbscan_min_pts: int = Field(5, ge=1)


class SlicingSettings(BaseModel):
    """Point-cloud preprocessing and slicing parameters"""

    sigma_s: float = Field(1.0, gt=0.0)
    sigma1: float = Field(0.01, gt=0.0)
    sigma2: float = Field(0.01, gt=0.0)
    alpha: float = 0.0
    alpha_policy: Literal["fixed", "auto"] = "fixed"


class DescriptorSettings(BaseModel):
    """Persistence image and descriptor layout parameters"""

    pi_resolution: int = Field(8, ge=1)
    pi_sigma: Optional[float] = Field(None, gt=0.0)
    pi_birth_min: float = -0.02
    pi_birth_max: float = 0.02
    pi_persistence_max: float = Field(0.2, gt=0.0)
    layout_margin: int = Field(1, ge=0)

    def resolved_sigma(self, sigma2: float) -> float:
        """Gaussian spread of the persistence image, 0.5 * sigma2 unless set"""
        return self.pi_sigma if self.pi_sigma is not None else 0.5 * sigma2


class ModelSettings(BaseModel):
    """Classifier parameters"""

    hidden_units: int = Field(512, ge=1)
    max_iter: int = Field(300, ge=1)
    learning_rate_init: float = Field(1e-3, gt=0.0)
    l2_penalty: float = Field(1e-4, ge=0.0)
    fusion: Literal["m1", "m2", "fused"] = "fused"


class SynthSettings(BaseModel):
    """Synthetic benchmark parameters"""

    n_points: int = Field(1500, ge=100)
    object_size: float = Field(0.1, gt=0.0)
    train_views: int = Field(60, ge=1)
    test_views: int = Field(20, ge=1)
    occlusion_fractions: List[float] = [0.0, 0.15, 0.30]
    occlusion_axis: Literal["x", "y", "z"] = "z"
    occlusion_frame: Literal["view", "world"] = "view"
    jitter: float = Field(0.0, ge=0.0)

    @field_validator("occlusion_fractions", mode="before")
    @classmethod
    def _split_fractions(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [float(v) for v in value.split(",") if v.strip()]
        return value


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(
        env_prefix="THOR2_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )

    # ============== APPLICATION ==============
    log_level: str = "INFO"
    log_format: Literal["json", "console"] = "json"
    workers: int = Field(4, ge=1)
    seed: int = 0

    # ============== PIPELINE ==============
    colorspace: ColorspaceSettings = ColorspaceSettings()
    mapper: MapperSettings = MapperSettings()
    slicing: SlicingSettings = SlicingSettings()
    descriptor: DescriptorSettings = DescriptorSettings()
    model: ModelSettings = ModelSettings()
    synth: SynthSettings = SynthSettings()


SECTIONS = ("colorspace", "mapper", "slicing", "descriptor", "model", "synth")


def _locate_line(text: str, loc: Sequence[Any]) -> Optional[int]:
    """1-based line of the YAML node addressed by a validation error location"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None

    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                if str(key_node.value).lower() == str(key).lower():
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _deep_merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Settings:
    """
    Build settings from an optional YAML file plus flag overrides.

    Raises:
        ConfigException: On YAML syntax errors or invalid values, with path and line
    """
    data: Dict[str, Any] = {}
    text = ""
    source = str(config_path) if config_path else "<flags>"

    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as e:
            raise ConfigException(f"Cannot read config file: {e}", details={"path": source})
        try:
            loaded = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigException(
                f"Invalid YAML: {getattr(e, 'problem', None) or e}",
                details={"path": source, "line": mark.line + 1 if mark else None},
            )
        if not isinstance(loaded, dict):
            raise ConfigException(
                "Config file must contain a mapping of sections",
                details={"path": source, "line": 1},
            )
        data = loaded

    data = _deep_merge(data, overrides or {})

    try:
        return Settings(**data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = list(first["loc"])
        raise ConfigException(
            f"Invalid configuration value at {'.'.join(str(p) for p in loc)}: {first['msg']}",
            details={
                "path": source,
                "line": _locate_line(text, loc) if text else None,
                "key": ".".join(str(p) for p in loc),
            },
        )

