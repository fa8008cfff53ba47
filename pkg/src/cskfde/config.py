"""YAML configuration: source chromaticities, constellation tables, CIL
matrices and experiment defaults.  CLI flags override file values."""

from __future__ import annotations

import numpy as np
import yaml

from . import channel as chan
from . import colorimetry
from .errors import InvalidConfig

DEFAULTS = {
    "n": 64,
    "cp": 8,
    "symbol_rate": 24e6,
    "target_ber": 1e-6,
    "min_bit_errors": 100,
    "max_bits": 200_000_000,
    "seed": 0,
    "n_taps": chan.DEFAULT_N_TAPS,
}


def load_config(path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: top level must be a mapping")
    return data


def merge(config: dict, overrides: dict) -> dict:
    """File values under CLI values: explicit flags win."""
    out = dict(DEFAULTS)
    out.update(config)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def sources_from_config(config: dict, scheme: str):
    """Build a SourceSet from a ``sources`` mapping, or the shipped default."""
    section = (config.get("sources") or {}).get(scheme)
    if section is None:
        if scheme == colorimetry.TLED:
            return colorimetry.default_tled_sources()
        return colorimetry.default_qled_sources()
    try:
        names = tuple(entry["name"] for entry in section)
        xy = np.array([entry["xy"] for entry in section], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"sources.{scheme}: need [{{name, xy: [x, y]}}, ...]") from exc
    return colorimetry.SourceSet(names, xy)


def tled_tables_from_config(config: dict):
    """Optional ``tables.tled`` override: {order: [[[r, y, b], label], ...]}."""
    section = (config.get("tables") or {}).get("tled")
    if section is None:
        return None
    tables = {}
    try:
        for order, rows in section.items():
            tables[int(order)] = tuple(
                (tuple(float(v) for v in row[0]), int(row[1])) for row in rows)
    except (TypeError, ValueError, IndexError) as exc:
        raise InvalidConfig("tables.tled: need {order: [[[r,y,b], label], ...]}") from exc
    return tables


def g_matrix_from_config(config: dict, scheme: str):
    section = (config.get("matrices") or {}).get(f"g_{scheme}")
    if section is None:
        return chan.G_TLED if scheme == colorimetry.TLED else chan.G_QLED
    g = np.array(section, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidConfig(f"matrices.g_{scheme}: must be a square matrix")
    return g


def build_constellation_from_config(config: dict, scheme: str, order: int):
    sources = sources_from_config(config, scheme)
    if scheme == colorimetry.TLED:
        return colorimetry.build_tled_constellation(
            order, sources, tled_tables_from_config(config))
    return colorimetry.build_qled_constellation(order, sources)
