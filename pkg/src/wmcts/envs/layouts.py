"""Loader for the plain-text grid fixtures shipped with the package.

Format: one character per cell, one line per row, ``#`` wall and ``.``
empty; lines starting with ``;`` are comments and a ``params:`` line holds
``key=value`` pairs. Each fixture documents its extra glyphs in its header.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources


@dataclass(frozen=True)
class GridFixture:
    name: str
    rows: tuple[str, ...]
    params: dict = field(default_factory=dict)

    @property
    def nrow(self) -> int:
        return len(self.rows)

    @property
    def ncol(self) -> int:
        return len(self.rows[0])

    def cells(self, glyph: str) -> list[int]:
        """Row-major indices of every cell holding ``glyph``."""
        return [r * self.ncol + c for r, row in enumerate(self.rows) for c, ch in enumerate(row) if ch == glyph]


def fixture_text(name: str) -> str:
    return resources.files("wmcts.envs").joinpath("fixtures", f"{name}.txt").read_text(encoding="utf-8")


def fixture_sha256(name: str) -> str:
    return hashlib.sha256(fixture_text(name).encode("utf-8")).hexdigest()


def load_fixture(name: str) -> GridFixture:
    rows, params = [], {}
    for line in fixture_text(name).splitlines():
        if not line.strip() or line.startswith(";"):
            continue
        if line.startswith("params:"):
            for item in line.split(":", 1)[1].split():
                key, value = item.split("=")
                params[key] = float(value) if "." in value else int(value)
            continue
        rows.append(line.rstrip())
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError(f"fixture {name!r} is not a rectangular grid")
    return GridFixture(name, tuple(rows), params)
