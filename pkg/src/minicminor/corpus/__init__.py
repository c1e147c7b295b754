"""Small hand-written programs shipped with the package."""
from __future__ import annotations

from importlib import resources

from ..syntax import Program, parse_program


def names() -> list[str]:
    return sorted(f.name[:-5] for f in resources.files(__name__).iterdir()
                  if f.name.endswith(".cmin"))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(name + ".cmin").read_text()


def path(name: str) -> str:
    return str(resources.files(__name__).joinpath(name + ".cmin"))


def load(name: str) -> Program:
    return parse_program(text(name))


def load_all() -> dict[str, Program]:
    return {n: load(n) for n in names()}
