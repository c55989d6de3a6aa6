"""Service configuration with flags > env > config-file precedence."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from casescope.errors import ConfigError
from casescope.layout import LayoutConfig
from casescope.mentions import TokenizerConfig

ENV_PREFIX = "CASESCOPE_"


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    records_path: Path
    coords_file: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    default_k: int = 5
    protrusion_theta: float = 0.5
    stripe_bins: int = 10
    seed: int = 0
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)

    def validate(self) -> None:
        if not self.data_dir.exists() or not self.data_dir.is_dir():
            raise ConfigError(f"dataDir {self.data_dir} does not exist or is not a directory")
        parent = self.records_path.parent
        if not parent.exists():
            raise ConfigError(f"recordsPath parent {parent} does not exist")
        if not os.access(parent, os.W_OK):
            raise ConfigError(f"recordsPath parent {parent} is not writable")
        if self.coords_file is not None and not self.coords_file.exists():
            raise ConfigError(f"coordsFile {self.coords_file} does not exist")
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port must be in [1, 65535], got {self.port}")
        if self.default_k < 1:
            raise ConfigError(f"defaultK must be >= 1, got {self.default_k}")
        if self.protrusion_theta <= 0:
            raise ConfigError(f"protrusionTheta must be positive, got {self.protrusion_theta}")
        if self.stripe_bins < 1:
            raise ConfigError(f"stripeBins must be >= 1, got {self.stripe_bins}")
        self.layout.validate()


def _layout_from_doc(doc: Mapping[str, Any]) -> LayoutConfig:
    known = {
        "dt": "dt",
        "damping": "damping",
        "maxIter": "max_iter",
        "convergenceEps": "convergence_eps",
        "rMin": "r_min",
        "initialRadius": "initial_radius",
        "imageMass": "image_mass",
        "seed": "seed",
    }
    unknown = set(doc) - set(known)
    if unknown:
        raise ConfigError(f"unknown layout config fields: {sorted(unknown)}")
    return LayoutConfig(**{known[k]: v for k, v in doc.items()})


def _tokenizer_from_doc(doc: Mapping[str, Any]) -> TokenizerConfig:
    unknown = set(doc) - {"lowercase", "stopwords"}
    if unknown:
        raise ConfigError(f"unknown tokenizer config fields: {sorted(unknown)}")
    return TokenizerConfig(
        lowercase=bool(doc.get("lowercase", True)),
        stopwords=frozenset(doc.get("stopwords", ())),
    )


def resolve_config(
    flags: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> ServiceConfig:
    """Build and validate a ServiceConfig; precedence is flags > env > file > defaults."""
    flags = flags or {}
    env = os.environ if env is None else env

    config_path = flags.get("config") or env.get(f"{ENV_PREFIX}CONFIG")
    file_doc: dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            file_doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None

    def pick(flag: str, env_key: str, file_key: str, default, convert: Callable):
        if flags.get(flag) is not None:
            return convert(flags[flag])
        raw = env.get(f"{ENV_PREFIX}{env_key}")
        if raw is not None:
            return convert(raw)
        if file_doc.get(file_key) is not None:
            return convert(file_doc[file_key])
        return default

    data_dir = pick("data_dir", "DATA_DIR", "dataDir", None, Path)
    records_path = pick("records_path", "RECORDS_PATH", "recordsPath", None, Path)
    if data_dir is None:
        raise ConfigError("dataDir is required (flag --data-dir, env, or config file)")
    if records_path is None:
        raise ConfigError("recordsPath is required (flag --records-path, env, or config file)")

    config = ServiceConfig(
        data_dir=data_dir,
        records_path=records_path,
        coords_file=pick("coords_file", "COORDS_FILE", "coordsFile", None, Path),
        host=pick("host", "HOST", "host", "127.0.0.1", str),
        port=pick("port", "PORT", "port", 8000, int),
        default_k=pick("k", "K", "defaultK", 5, int),
        protrusion_theta=pick("protrusion_theta", "PROTRUSION_THETA", "protrusionTheta", 0.5, float),
        stripe_bins=pick("stripe_bins", "STRIPE_BINS", "stripeBins", 10, int),
        seed=pick("seed", "SEED", "seed", 0, int),
        tokenizer=_tokenizer_from_doc(file_doc.get("tokenizer", {})),
        layout=_layout_from_doc(file_doc.get("layout", {})),
    )
    config.validate()
    return config
