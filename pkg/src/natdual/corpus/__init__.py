"""Built-in algebras, alter egos and test-space hints for the seven case studies."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..algebra import FiniteAlgebra
from ..duality.egos import brute_force_alter_ego
from ..duality.structures import AlterEgo
from ..duality.tsm import TSHint
from ..formats import parse_algebra, parse_hint, parse_structure

ALGEBRAS = ("D4", "D42bar", "MS", "K2", "K3", "dS", "L6", "L5")
EGOS = ("D4~", "MS~", "K2~", "K3~", "dS~", "L6~", "L5~")
# no alter ego is transcribed for L5; it is built by brute force
COMPUTED_EGOS = {"L5~": "L5"}


def _read(filename: str) -> str:
    return resources.files(__name__).joinpath(filename).read_text(encoding="utf-8")


def _exists(filename: str) -> bool:
    return resources.files(__name__).joinpath(filename).is_file()


def text(name: str) -> str:
    """Source text of a corpus document (algebra or alter ego)."""
    return _read(_filename(name))


def _filename(name: str) -> str:
    if name.endswith("~"):
        return f"{name[:-1]}_ego.str"
    return f"{name}.alg"


@lru_cache(maxsize=None)
def load_algebra(name: str) -> FiniteAlgebra:
    if name not in ALGEBRAS:
        raise KeyError(f"no corpus algebra named {name!r}; known: {', '.join(ALGEBRAS)}")
    return parse_algebra(_read(f"{name}.alg"), source=f"{name}.alg")


@lru_cache(maxsize=None)
def load_ego(name: str) -> AlterEgo:
    if name in COMPUTED_EGOS:
        return brute_force_alter_ego(load_algebra(COMPUTED_EGOS[name]), name=name)
    if name not in EGOS:
        raise KeyError(f"no corpus alter ego named {name!r}; known: {', '.join(EGOS)}")
    return parse_structure(_read(_filename(name)), load_algebra, source=_filename(name))


def load(name: str) -> FiniteAlgebra | AlterEgo:
    return load_ego(name) if name.endswith("~") else load_algebra(name)


@dataclass(frozen=True)
class Case:
    key: str
    title: str
    algebra: str
    ego: str
    s: int
    size: int
    free: int
    X: int
    EX: int
    big: bool
    hint: str | None

    def load_hint(self) -> TSHint | None:
        if not self.hint or not _exists(self.hint):
            return None
        M = load_algebra(self.algebra)
        return parse_hint(_read(self.hint), M, source=self.hint).hint


@lru_cache(maxsize=None)
def cases() -> tuple[Case, ...]:
    return tuple(Case(**row) for row in json.loads(_read("cases.json")))


def case(key: str) -> Case:
    for c in cases():
        if key in (c.key, c.algebra):
            return c
    raise KeyError(f"no case {key!r}; known: {', '.join(c.key for c in cases())}")


def documents() -> list[str]:
    """File names of every bundled document."""
    return sorted(p.name for p in resources.files(__name__).iterdir() if p.name.endswith((".alg", ".str", ".ts")))
