"""Built-in rule files."""

from importlib import resources

from ..pattern import Theory, parse_theory

BUILTIN = ("maths", "basic_maths", "prop", "calc")


def theory_text(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.rules").read_text(encoding="utf-8")


def load_theory(name: str) -> Theory:
    if name not in BUILTIN:
        raise KeyError(f"no built-in theory {name!r}; choose from {', '.join(BUILTIN)}")
    return parse_theory(theory_text(name))
