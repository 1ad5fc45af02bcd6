import logging
import os
from pathlib import Path
from typing import Any, Mapping

import yaml

from fdi_game.core.errors import ConfigError
from fdi_game.core.ports import ExperimentLoader

logger = logging.getLogger(__name__)


class YamlExperimentLoader(ExperimentLoader):
    def load(self, file_path: str | Path) -> Mapping[str, Any]:
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"Config file not found: {file_path}")
        logger.info(f"Loading experiment config: {file_path}")
        with open(file_path, "r", encoding="utf-8") as stream:
            raw = yaml.safe_load(stream)
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{file_path}: top level must be a mapping, got {type(raw).__name__}")
        return raw


def merge_overrides(raw: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict[str, Any]:
    """
    Merge command-line overrides into a raw config mapping. Keys are dotted
    paths (``game.horizon``); ``None`` values mean "not given" and are skipped.
    """
    merged: dict[str, Any] = _deep_copy(raw)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        *parents, leaf = dotted.split(".")
        for key in parents:
            child = node.get(key)
            if child is None:
                child = node[key] = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"cannot override {dotted}: {key} is not a section")
            node = child
        node[leaf] = value
    return merged


def _deep_copy(raw: Mapping[str, Any]) -> dict[str, Any]:
    return {key: _deep_copy(value) if isinstance(value, Mapping) else value for key, value in raw.items()}
