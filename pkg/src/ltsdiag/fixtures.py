"""Packaged reference components A, B, C, D and their manifest.

A and B compose into a diagnosable system; C and D compose into a
non-diagnosable one (two runs with observation o2.(o4)^w disagree on the
fault).  They double as CLI demo inputs; `fixture_path` exposes the raw
files.
"""

from __future__ import annotations

from dataclasses import replace
from importlib import resources
from pathlib import Path

from .aut import Manifest, load_manifest, parse_aut
from .lts import Lts

_NAMES = ("A", "B", "C", "D")


def fixture_path(name: str) -> Path:
    base = resources.files(__package__) / "fixtures"
    path = Path(str(base / name))
    if not path.exists():
        raise FileNotFoundError(name)
    return path


def fixture_manifest() -> Manifest:
    return load_manifest(fixture_path("manifest.json").read_text())


def component(name: str) -> Lts:
    if name not in _NAMES:
        raise KeyError(f"unknown fixture component {name!r}")
    manifest = replace(fixture_manifest(), name=name)
    return parse_aut(fixture_path(f"{name}.aut").read_text(), manifest)


def component_a() -> Lts:
    return component("A")


def component_b() -> Lts:
    return component("B")


def component_c() -> Lts:
    return component("C")


def component_d() -> Lts:
    return component("D")
