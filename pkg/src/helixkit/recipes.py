"""Library recipes: declarative inputs for extraction.

A recipe is a small flat TOML file naming a library and saying where its
static archive comes from, either directly (`archive`) or via a shell build
command (`build_cmd` + `artifact`). Only the flat string-key subset of TOML
is accepted; there is no reason for recipes to need tables or arrays.

    name = "tinymath"
    build_cmd = "cc -c tinymath.c && ar rcs libtinymath.a tinymath.o"
    artifact = "libtinymath.a"
    headers = "include"
"""
from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .errors import HelixError, ToolchainError
from .slicer import LibraryRecipe, ToolchainConfig

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_KEY_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_KNOWN_KEYS = {"name", "archive", "build_cmd", "artifact", "headers", "version"}


def parse_flat_toml(text: str, source: str = "<recipe>") -> dict[str, str]:
    """Parse `key = "value"` lines; comments and blank lines are ignored.

    Anything beyond that subset (tables, arrays, multiline strings) is
    rejected loudly rather than misread.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, rest = line.partition("=")
        key = key.strip()
        rest = rest.strip()
        if not eq or not _KEY_RE.match(key):
            raise HelixError(f"{source}:{lineno}: expected `key = \"value\"`")
        if len(rest) < 2 or rest[0] != '"' or not rest.endswith('"'):
            raise HelixError(
                f"{source}:{lineno}: value must be a double-quoted string"
            )
        body = rest[1:-1]
        if '"' in body.replace('\\"', ""):
            raise HelixError(f"{source}:{lineno}: stray quote inside value")
        if key in values:
            raise HelixError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = body.replace('\\"', '"').replace("\\\\", "\\")
    return values


@dataclass(frozen=True)
class Recipe:
    """Parsed recipe plus the directory its relative paths resolve against."""

    name: str
    base_dir: Path
    archive: str | None = None
    build_cmd: str | None = None
    artifact: str | None = None
    headers: str | None = None
    version: str = "0"


def load_recipe(path: Path) -> Recipe:
    path = Path(path)
    try:
        values = parse_flat_toml(path.read_text(), source=str(path))
    except OSError as exc:
        raise HelixError(f"cannot read recipe {path}: {exc}") from exc

    unknown = sorted(set(values) - _KNOWN_KEYS)
    if unknown:
        raise HelixError(f"{path}: unknown recipe keys: {', '.join(unknown)}")
    name = values.get("name", "")
    if not _NAME_RE.match(name):
        raise HelixError(
            f"{path}: recipe name must be a dash-free C identifier, got {name!r}"
        )
    has_archive = "archive" in values
    has_build = "build_cmd" in values or "artifact" in values
    if has_archive == has_build:
        raise HelixError(
            f"{path}: recipe needs either `archive` or `build_cmd` + `artifact`"
        )
    if has_build and not ("build_cmd" in values and "artifact" in values):
        raise HelixError(f"{path}: `build_cmd` and `artifact` go together")
    return Recipe(
        name=name,
        base_dir=path.parent.resolve(),
        archive=values.get("archive"),
        build_cmd=values.get("build_cmd"),
        artifact=values.get("artifact"),
        headers=values.get("headers"),
        version=values.get("version", "0"),
    )


def realize_recipe(
    recipe: Recipe,
    toolchain: ToolchainConfig,
    scratch_dir: Path,
) -> LibraryRecipe:
    """Produce a LibraryRecipe whose archive exists on disk.

    `archive` recipes resolve in place. `build_cmd` recipes run in a scratch
    copy of the recipe directory (the source tree is never written to) with
    CC exported, and the named artifact is kept under scratch_dir.
    """
    scratch_dir = Path(scratch_dir)
    scratch_dir.mkdir(parents=True, exist_ok=True)
    header_dir = None
    if recipe.headers is not None:
        header_dir = (recipe.base_dir / recipe.headers).resolve()

    if recipe.archive is not None:
        archive_path = (recipe.base_dir / recipe.archive).resolve()
        if not archive_path.is_file():
            raise HelixError(
                f"recipe {recipe.name}: archive not found: {archive_path}"
            )
        return LibraryRecipe(recipe.name, archive_path, toolchain, header_dir)

    build_root = Path(tempfile.mkdtemp(prefix=f"helix-build-{recipe.name}-"))
    try:
        work = build_root / "src"
        shutil.copytree(
            recipe.base_dir, work,
            ignore=shutil.ignore_patterns("*.a", "*.o"),
        )
        env = dict(os.environ, CC=toolchain.compiler_cmd)
        try:
            proc = subprocess.run(
                ["sh", "-c", recipe.build_cmd],
                cwd=work, env=env, capture_output=True, text=True,
                timeout=toolchain.timeout_s * 4,
            )
        except FileNotFoundError:
            raise ToolchainError("shell `sh` not found") from None
        except subprocess.TimeoutExpired:
            raise HelixError(
                f"recipe {recipe.name}: build timed out"
            ) from None
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout).strip().splitlines()[-5:]
            raise HelixError(
                f"recipe {recipe.name}: build failed: " + " | ".join(tail)
            )
        built = work / recipe.artifact
        if not built.is_file():
            raise HelixError(
                f"recipe {recipe.name}: build_cmd did not produce {recipe.artifact}"
            )
        kept = scratch_dir / f"lib{recipe.name}.orig.a"
        shutil.copyfile(built, kept)
    finally:
        shutil.rmtree(build_root, ignore_errors=True)
    return LibraryRecipe(recipe.name, kept, toolchain, header_dir)
