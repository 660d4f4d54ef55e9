"""Horn-clause resolution engines, proof evidence and program analyses."""
from importlib import resources

from .syntax import parse_program, parse_query

__all__ = ["fixture_names", "load_fixture", "parse_program", "parse_query"]
__version__ = "0.1.0"


def load_fixture(name: str):
    """Parse one of the bundled ``programs/<name>.hc`` files."""
    text = resources.files(__package__).joinpath("programs", f"{name}.hc").read_text()
    return parse_program(text)


def fixture_names() -> list[str]:
    folder = resources.files(__package__).joinpath("programs")
    return sorted(p.name[:-3] for p in folder.iterdir() if p.name.endswith(".hc"))
