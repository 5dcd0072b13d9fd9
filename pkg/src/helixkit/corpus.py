"""On-disk component corpus: one directory per extracted library.

Layout per library:

    <root>/<name>/library.json            name, version, component index
    <root>/<name>/lib<name>.a             renamed static archive
    <root>/<name>/<component-id>.stub.c   call stub for one component
    <root>/<name>/<component-id>.labels.txt  rendered labels, one per line

The corpus fingerprint hashes all of the above so a dataset manifest can
pin exactly which extraction it was generated from.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import HelixError
from .model import ComponentSpec, parse_labels, render_labels
from .slicer import ExtractionResult

_INDEX_NAME = "library.json"


def write_library(
    root: Path,
    name: str,
    version: str,
    extraction: ExtractionResult,
) -> Path:
    """Persist one library's extraction under `<root>/<name>/`."""
    lib_dir = Path(root) / name
    lib_dir.mkdir(parents=True, exist_ok=True)

    archive_name = f"lib{name}.a"
    archive_dest = lib_dir / archive_name
    data = Path(extraction.renamed_archive).read_bytes()
    archive_dest.write_bytes(data)

    index_components = []
    for comp in extraction.components:
        if comp.library_id != name:
            raise HelixError(
                f"component {comp.id} belongs to {comp.library_id}, not {name}"
            )
        stub_name = f"{comp.id}.stub.c"
        labels_name = f"{comp.id}.labels.txt"
        (lib_dir / stub_name).write_text(comp.stub_source)
        (lib_dir / labels_name).write_text(
            "\n".join(render_labels(comp.labels)) + "\n"
        )
        index_components.append({
            "id": comp.id,
            "export_name": comp.export_name,
            "seed_function": comp.seed_function,
            "stub": stub_name,
            "labels": labels_name,
        })

    index = {
        "name": name,
        "version": version,
        "archive": archive_name,
        "archive_ref": extraction.archive_ref,
        "components": index_components,
        "discarded": [
            {"export": d.export_name, "reason": d.reason}
            for d in extraction.discarded
        ],
    }
    (lib_dir / _INDEX_NAME).write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n"
    )
    return lib_dir


@dataclass(frozen=True)
class CorpusLibrary:
    name: str
    version: str
    archive_path: Path
    archive_ref: str
    components: tuple[ComponentSpec, ...]


@dataclass(frozen=True)
class Corpus:
    root: Path
    libraries: tuple[CorpusLibrary, ...]  # sorted by name

    def __post_init__(self):
        names = [lib.name for lib in self.libraries]
        if len(set(names)) != len(names):
            raise HelixError("duplicate library names in corpus")

    @property
    def library_names(self) -> tuple[str, ...]:
        return tuple(lib.name for lib in self.libraries)

    def library(self, name: str) -> CorpusLibrary:
        for lib in self.libraries:
            if lib.name == name:
                return lib
        raise HelixError(f"no such library in corpus: {name}")

    def component(self, component_id: str) -> ComponentSpec:
        comp = self.components_by_id().get(component_id)
        if comp is None:
            raise HelixError(f"no such component in corpus: {component_id}")
        return comp

    def components_by_id(self) -> dict[str, ComponentSpec]:
        return {
            comp.id: comp
            for lib in self.libraries
            for comp in lib.components
        }

    def archive_paths(self) -> dict[str, Path]:
        """Content-addressed lookup used when materializing sample projects."""
        return {lib.archive_ref: lib.archive_path for lib in self.libraries}

    def fingerprint(self) -> str:
        """Content hash over every label, stub, and archive in the corpus."""
        h = hashlib.sha256()
        for lib in self.libraries:
            h.update(f"library {lib.name} {lib.version} {lib.archive_ref}\n"
                      .encode())
            for comp in lib.components:
                stub_hash = hashlib.sha256(comp.stub_source.encode()).hexdigest()
                h.update(f"component {comp.id} {comp.export_name} {stub_hash}\n"
                          .encode())
                for rendered in render_labels(comp.labels):
                    h.update(f"label {rendered}\n".encode())
        return "sha256:" + h.hexdigest()


def _load_library(lib_dir: Path) -> CorpusLibrary:
    index_path = lib_dir / _INDEX_NAME
    try:
        index = json.loads(index_path.read_text())
    except (OSError, ValueError) as exc:
        raise HelixError(f"unreadable library index {index_path}: {exc}") from exc

    name = index.get("name")
    if name != lib_dir.name:
        raise HelixError(
            f"{index_path}: library name {name!r} does not match directory"
        )
    archive_path = lib_dir / index["archive"]
    if not archive_path.is_file():
        raise HelixError(f"{lib_dir}: missing archive {index['archive']}")
    archive_ref = index["archive_ref"]
    actual_ref = "sha256:" + hashlib.sha256(archive_path.read_bytes()).hexdigest()
    if actual_ref != archive_ref:
        raise HelixError(
            f"{lib_dir}: archive content does not match recorded ref"
        )

    components = []
    for entry in index["components"]:
        stub_source = (lib_dir / entry["stub"]).read_text()
        label_lines = (lib_dir / entry["labels"]).read_text().splitlines()
        labels = parse_labels(line for line in label_lines if line.strip())
        components.append(ComponentSpec(
            id=entry["id"],
            library_id=name,
            export_name=entry["export_name"],
            seed_function=entry["seed_function"],
            labels=labels,
            stub_source=stub_source,
            archive_ref=archive_ref,
        ))
    if not components:
        raise HelixError(f"{lib_dir}: library has no components")
    return CorpusLibrary(
        name=name,
        version=str(index.get("version", "0")),
        archive_path=archive_path,
        archive_ref=archive_ref,
        components=tuple(components),
    )


def load_corpus(root: Path) -> Corpus:
    root = Path(root)
    if not root.is_dir():
        raise HelixError(f"corpus root is not a directory: {root}")
    lib_dirs = sorted(
        (d for d in root.iterdir() if (d / _INDEX_NAME).is_file()),
        key=lambda d: d.name,
    )
    if not lib_dirs:
        raise HelixError(f"no libraries found under {root}")
    return Corpus(root=root, libraries=tuple(_load_library(d) for d in lib_dirs))
