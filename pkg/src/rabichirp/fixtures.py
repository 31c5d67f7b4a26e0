"""Access to the bundled example systems (hf3, two, multi12)."""

from importlib.resources import files
from pathlib import Path

BUNDLED = ("hf3", "two", "multi12")


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled system file, by short name."""
    if name not in BUNDLED:
        raise KeyError(f"unknown fixture {name!r}; bundled: {BUNDLED}")
    return Path(str(files("rabichirp") / "fixtures" / f"{name}.json"))
