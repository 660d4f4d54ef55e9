"""Print the reference derivations for the bundled example programs."""
from pathlib import Path

import hornlp
from hornlp.cli import main as cli

PROGRAMS = Path(hornlp.__file__).parent / "programs"

RUNS = [
    ("connect", "connect(X, Y)", ["--search", "dfs", "--max-steps", "3"]),
    ("stream", "stream(X)", ["-s", "struct", "--max-steps", "6"]),
    ("overlap", "p(X)", ["-s", "unif"]),
    ("overlap", "p(X)", ["-s", "struct"]),
    ("nthfrom", "nth(s(z), Y, Z^), from(s(z), Y)", ["-s", "partial", "--evidence"]),
    ("fib", "take(s(s(s(z))), Y, Z^), fib(a, b, Y)", ["-s", "partial"]),
]


def main():
    for name, query, opts in RUNS:
        print(f"## {name} {' '.join(opts)}")
        cli(["run", str(PROGRAMS / f"{name}.hc"), "-q", query, "--trace", *opts])
        print()


if __name__ == "__main__":
    main()
