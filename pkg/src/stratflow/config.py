"""Flat ``key = value`` experiment configuration files.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines
are ignored.  Lists are comma separated.  Stepsizes may be written as
decimals, as powers ``2^-4``, or as a power range ``2^-4..2^-9``.

Keys: fixture, schemes, T, h, q_rule, q_scale, n_paths, n_batches, seed,
lattice, ref_factor, ref_scheme, chunk, workers, out.
"""
from __future__ import annotations

import math
import re

from .harness import ExperimentSpec

__all__ = ["ConfigError", "parse_config", "load_config", "render_config", "KEYS"]


class ConfigError(ValueError):
    pass


_INT = ("n_paths", "n_batches", "seed", "lattice", "ref_factor", "chunk", "workers")
_FLOAT = ("T", "q_scale")
_STR = ("fixture", "q_rule", "ref_scheme", "out")
KEYS = ("fixture", "schemes", "T", "h") + _INT + ("q_rule", "q_scale", "ref_scheme", "out")

_POW = re.compile(r"^2\^(-?\d+)$")
_RANGE = re.compile(r"^2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)$")


def _parse_h(text):
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        step = 1 if b >= a else -1
        return tuple(2.0 ** k for k in range(a, b + step, step))
    out = []
    for item in text.split(","):
        item = item.strip()
        m = _POW.match(item)
        out.append(2.0 ** int(m.group(1)) if m else float(item))
    return tuple(out)


def _format_h(hs):
    parts = []
    for h in hs:
        k = round(math.log2(h))
        parts.append(f"2^{k}" if 2.0 ** k == h else repr(h))
    return ",".join(parts)


def parse_config(text) -> ExperimentSpec:
    """Parse configuration text into a validated :class:`ExperimentSpec`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key == "schemes":
                values[key] = tuple(s.strip() for s in value.split(",") if s.strip())
            elif key == "h":
                values["h_list"] = _parse_h(value)
            elif key in _INT:
                values[key] = int(value)
            elif key in _FLOAT:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    for required in ("fixture", "schemes"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    spec = ExperimentSpec(**values)
    try:
        spec.validate()
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return spec


def load_config(path) -> ExperimentSpec:
    with open(path) as fh:
        return parse_config(fh.read())


def render_config(spec: ExperimentSpec) -> str:
    """Canonical text form; ``parse_config(render_config(s))`` reproduces ``s``."""
    lines = [
        f"fixture = {spec.fixture}",
        f"schemes = {','.join(spec.schemes)}",
        f"T = {spec.T!r}",
        f"h = {_format_h(spec.h_list)}",
        f"q_rule = {spec.q_rule}",
        f"q_scale = {spec.q_scale!r}",
    ]
    lines += [f"{k} = {getattr(spec, k)}" for k in _INT]
    lines.append(f"ref_scheme = {spec.ref_scheme}")
    if spec.out is not None:
        lines.append(f"out = {spec.out}")
    return "\n".join(lines) + "\n"
