"""Core primitives: labels, components, blueprints, transforms, samples.

A component is a labeled, linkable slice of a library plus the C stub that
calls into it. Samples are built by rendering a blueprint over a list of
components; a sample's label set is the union of its components' labels and
ground-truth similarity between two samples is the Jaccard index of their
label sets.
"""
from __future__ import annotations

import os
import re
import subprocess
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import HelixError

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True, order=True)
class Label:
    """A `<library>-<function>` tag attached to components and samples."""

    library: str
    function: str

    def __post_init__(self):
        if not self.library or not self.function:
            raise HelixError("label parts must be non-empty")

    def render(self) -> str:
        return f"{self.library}-{self.function}"

    @classmethod
    def parse(cls, text: str) -> "Label":
        """Split a rendered label on its FIRST dash.

        Function names may contain dashes; library names that do will not
        round-trip and are rejected by the corpus layer, not here.
        """
        library, sep, function = text.partition("-")
        if not sep or not library or not function:
            raise HelixError(f"malformed label: {text!r}")
        return cls(library, function)


# Label sets are plain frozensets; all similarity math is set algebra.
LabelSet = frozenset


def render_labels(labels: Iterable[Label]) -> list[str]:
    return sorted(label.render() for label in labels)


def parse_labels(lines: Iterable[str]) -> frozenset[Label]:
    return frozenset(Label.parse(line.strip()) for line in lines if line.strip())


@dataclass(frozen=True)
class ComponentSpec:
    """A labeled slice of one library, packaged for linking.

    `export_name` is the post-rename symbol the stub calls; `seed_function`
    is the original exported function the slice was grown from.
    """

    id: str
    library_id: str
    export_name: str
    seed_function: str
    labels: frozenset[Label]
    stub_source: str
    archive_ref: str

    def __post_init__(self):
        if Label(self.library_id, self.seed_function) not in self.labels:
            raise HelixError(
                f"component {self.id}: seed label "
                f"{self.library_id}-{self.seed_function} missing from label set"
            )
        foreign = {l for l in self.labels if l.library != self.library_id}
        if foreign:
            raise HelixError(
                f"component {self.id}: labels from foreign libraries: "
                + ", ".join(sorted(l.render() for l in foreign))
            )


@dataclass(frozen=True)
class TransformSpec:
    """A labeled source- or artifact-level modification."""

    id: str
    kind: str  # "artifact" or "source"
    labels: frozenset[Label] = frozenset()

    def __post_init__(self):
        if self.kind not in ("artifact", "source"):
            raise HelixError(f"unknown transform kind: {self.kind}")


@dataclass(frozen=True)
class Blueprint:
    """Templated project boilerplate combining components into a program.

    `entry_template` must contain a `{{stubs}}` marker; the build script
    template uses `{{stubs}}` (stub file list) and `{{archives}}` (archive
    link directives, one per component in list order).
    """

    id: str
    entry_template: str
    build_template: str
    artifact_name: str = "sample"  # file the build script writes


_DEFAULT_ENTRY = """\
/* generated entry point: calls one stub per component, in order */
{{stubs}}

int main(void) {
    call_components();
    return 0;
}
"""

_DEFAULT_BUILD = """\
#!/bin/sh
# generated build script; toolchain comes in via CC/CFLAGS/LDFLAGS
# section GC at link time keeps only each component's labeled slice
set -e
exec ${CC:-cc} -ffunction-sections -fdata-sections ${CFLAGS:-} \\
    -Wl,--gc-sections -Wl,--sort-section=name -Wl,-z,noseparate-code \\
    -o sample main.c {{stubs}} {{archives}} ${LDFLAGS:-}
"""

DEFAULT_BLUEPRINT = Blueprint(
    id="cc-static",
    entry_template=_DEFAULT_ENTRY,
    build_template=_DEFAULT_BUILD,
)


@dataclass(frozen=True)
class SampleRecord:
    """One built binary plus its provenance and aggregated labels."""

    id: str
    component_ids: tuple[str, ...]
    labels: frozenset[Label]
    artifact_path: str
    build_status: str  # "ok" or "failed"
    build_log: str = ""


def label_union(components: Sequence[ComponentSpec]) -> frozenset[Label]:
    """Aggregate labels across components (set union, duplicates absorbed)."""
    if not components:
        raise HelixError("no components")
    return frozenset().union(*(c.labels for c in components))


def ground_truth_similarity(a: frozenset, b: frozenset) -> float:
    """Jaccard index of two label sets.

    Undefined (an error) when both sets are empty: samples are never
    label-less, so the 0/0 case always indicates a pipeline bug.
    """
    if not a and not b:
        raise HelixError("undefined similarity: both label sets empty")
    return len(a & b) / len(a | b)


def _stub_basename(component: ComponentSpec) -> str:
    return f"{component.id}.stub.c"


def _archive_basename(component: ComponentSpec) -> str:
    return f"lib{component.library_id}.a"


def render_blueprint(
    blueprint: Blueprint,
    components: Sequence[ComponentSpec],
    archives: Mapping[str, Path],
    out_dir: Path,
) -> Path:
    """Write a buildable project directory for the given component list.

    Output bytes are a pure function of the inputs: entry point calling each
    component's stub in list order, one stub source per component, each
    referenced archive, and a `build.sh`.
    """
    if not components:
        raise HelixError("no components")
    ids = [c.id for c in components]
    if len(set(ids)) != len(ids):
        raise HelixError("duplicate component id in sample")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    decls = []
    calls = []
    for comp in components:
        fn = f"invoke_{comp.export_name}"
        decls.append(f"void {fn}(void);")
        calls.append(f"    {fn}();")
    stubs_block = "\n".join(
        decls + ["", "static void call_components(void) {"] + calls + ["}"]
    )
    entry = blueprint.entry_template.replace("{{stubs}}", stubs_block)
    (out_dir / "main.c").write_text(entry)

    for comp in components:
        (out_dir / _stub_basename(comp)).write_text(comp.stub_source)

    seen_archives = {}
    for comp in components:
        name = _archive_basename(comp)
        if name in seen_archives:
            continue
        src = archives.get(comp.archive_ref)
        if src is None or not Path(src).is_file():
            raise HelixError(f"missing archive content: {comp.archive_ref}")
        data = Path(src).read_bytes()
        (out_dir / name).write_bytes(data)
        seen_archives[name] = comp.archive_ref

    stub_files = " ".join(_stub_basename(c) for c in components)
    archive_files = " ".join(_archive_basename(c) for c in components)
    script = blueprint.build_template.replace("{{stubs}}", stub_files)
    script = script.replace("{{archives}}", archive_files)
    build_sh = out_dir / "build.sh"
    build_sh.write_text(script)
    build_sh.chmod(0o755)
    return out_dir


def _strip_artifact(in_path: Path, out_path: Path) -> None:
    objcopy = os.environ.get("HELIX_OBJCOPY", "objcopy")
    proc = subprocess.run(
        [objcopy, "--strip-all", str(in_path), str(out_path)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise HelixError(f"strip failed: {proc.stderr.strip()}")


STRIP_TRANSFORM = TransformSpec(
    id="strip",
    kind="artifact",
    labels=frozenset({Label("transform", "strip")}),
)

# id -> callable(in_path, out_path). Kept tiny on purpose: strip is the only
# built-in; tests register their own.
ARTIFACT_TRANSFORMS = {"strip": _strip_artifact}
SOURCE_TRANSFORMS: dict = {}


def apply_transform(transform: TransformSpec, target: Path) -> Path:
    """Apply a registered transform; artifact kind requires a built binary.

    Artifact transforms write `<target>.<id>` next to the input; source
    transforms rewrite the project directory in place.
    """
    target = Path(target)
    if transform.kind == "artifact":
        if not target.is_file():
            raise HelixError(
                f"transform {transform.id} needs a built artifact, got {target}"
            )
        impl = ARTIFACT_TRANSFORMS.get(transform.id)
        if impl is None:
            raise HelixError(f"unknown artifact transform: {transform.id}")
        out = target.with_name(target.name + f".{transform.id}")
        impl(target, out)
        return out
    if not target.is_dir():
        raise HelixError(
            f"transform {transform.id} needs a source directory, got {target}"
        )
    impl = SOURCE_TRANSFORMS.get(transform.id)
    if impl is None:
        raise HelixError(f"unknown source transform: {transform.id}")
    impl(target)
    return target


def record_transform(record: SampleRecord, transform: TransformSpec,
                     artifact_path: str | None = None) -> SampleRecord:
    """Fold an applied transform into a sample: tags join the label set."""
    return replace(
        record,
        labels=record.labels | transform.labels,
        artifact_path=artifact_path or record.artifact_path,
    )
