"""Component extraction from C static libraries.

For each exported function of a library we build a tiny probe program that
references only that export and statically links the archive with dead-code
elimination active; the linker does the slicing. Surviving function symbols
of the probe binary become the component's labels, failed probes are
discarded, and the library's archive is rewritten with a content-hash symbol
prefix so components from different libraries can link together.
"""
from __future__ import annotations

import hashlib
import os
import re
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import elf
from .errors import HelixError, ToolchainError
from .model import ComponentSpec, Label

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# Flag sets per slicing strategy: (compile flags, link flags).
_STRATEGY_FLAGS = {
    "gc_sections": (["-ffunction-sections", "-fdata-sections"],
                    ["-Wl,--gc-sections"]),
    "lto": (["-flto", "-O2"], ["-flto", "-O2"]),
}


@dataclass(frozen=True)
class ToolchainConfig:
    """External compiler/objcopy commands and the slicing flag set."""

    compiler_cmd: str = "cc"
    objcopy_cmd: str = "objcopy"
    linker_flags: tuple[str, ...] = ()
    slicing_strategy: str = "gc_sections"
    timeout_s: int = 60

    def __post_init__(self):
        if self.slicing_strategy not in _STRATEGY_FLAGS:
            raise HelixError(f"unknown slicing strategy: {self.slicing_strategy}")
        if self.timeout_s <= 0:
            raise HelixError("timeout_s must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "ToolchainConfig":
        """Honor HELIX_CC / HELIX_OBJCOPY overrides."""
        overrides.setdefault("compiler_cmd", os.environ.get("HELIX_CC", "cc"))
        overrides.setdefault("objcopy_cmd",
                             os.environ.get("HELIX_OBJCOPY", "objcopy"))
        return cls(**overrides)

    def compile_flags(self) -> list[str]:
        return list(_STRATEGY_FLAGS[self.slicing_strategy][0])

    def link_flags(self) -> list[str]:
        return list(_STRATEGY_FLAGS[self.slicing_strategy][1]) + list(self.linker_flags)

    def check_available(self) -> None:
        for cmd in (self.compiler_cmd, self.objcopy_cmd):
            if shutil.which(cmd) is None:
                raise ToolchainError(f"required tool not found on PATH: {cmd}")


@dataclass(frozen=True)
class LibraryRecipe:
    """A library ready for slicing: name, static archive, toolchain."""

    name: str
    archive_path: Path
    toolchain: ToolchainConfig = field(default_factory=ToolchainConfig)
    header_dir: Path | None = None

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise HelixError(
                f"library name must be a dash-free C identifier: {self.name!r}"
            )


@dataclass(frozen=True)
class SliceResult:
    """Outcome of one probe build."""

    export_name: str
    status: str  # "built" or "discarded"
    surviving_functions: frozenset[str] = frozenset()
    binary_size: int = 0
    reason: str = ""


@dataclass(frozen=True)
class ArchiveSymbols:
    """Symbol inventory of a static archive, aggregated over all members."""

    exports: tuple[str, ...]            # global/weak defined functions, sorted
    functions: frozenset[str]           # all defined functions, incl. local
    global_definitions: frozenset[str]  # rename targets (functions and data)
    all_names: frozenset[str]
    skipped: dict  # export-shaped symbols we refuse to slice: name -> reason


def scan_archive(archive_path: Path) -> ArchiveSymbols:
    try:
        members = elf.archive_members_from(archive_path)
    except (OSError, HelixError) as exc:
        raise HelixError(f"bad archive: {archive_path}: {exc}") from exc
    if not members:
        raise HelixError(f"bad archive: {archive_path}: no members")

    exports: set[str] = set()
    functions: set[str] = set()
    global_defs: set[str] = set()
    all_names: set[str] = set()
    strong_defs: dict[str, int] = {}
    skipped: dict[str, str] = {}

    for member_name, body in members:
        try:
            symbols = elf.read_symbols(body)
        except HelixError as exc:
            raise HelixError(
                f"bad archive: member {member_name} of {archive_path}: {exc}"
            ) from exc
        for sym in symbols:
            all_names.add(sym.name)
            if not sym.defined:
                continue
            if sym.is_function:
                functions.add(sym.name)
            if not sym.is_global:
                continue
            if sym.type in (elf.STT_FUNC, elf.STT_OBJECT, elf.STT_GNU_IFUNC):
                global_defs.add(sym.name)
            if sym.type == elf.STT_GNU_IFUNC:
                skipped[sym.name] = "ifunc export"
                continue
            if "@" in sym.name:
                skipped[sym.name] = "versioned symbol"
                continue
            if sym.is_function:
                exports.add(sym.name)
                if sym.bind == elf.STB_GLOBAL:
                    strong_defs[sym.name] = strong_defs.get(sym.name, 0) + 1

    duplicated = sorted(n for n, count in strong_defs.items() if count > 1)
    if duplicated:
        raise HelixError(
            f"bad archive: {archive_path}: duplicate global definition of "
            + ", ".join(duplicated)
        )
    return ArchiveSymbols(
        exports=tuple(sorted(exports)),
        functions=frozenset(functions),
        global_definitions=frozenset(global_defs),
        all_names=frozenset(all_names),
        skipped=skipped,
    )


def enumerate_exports(lib: LibraryRecipe) -> list[str]:
    """Global, defined, function-typed symbols of the archive, sorted."""
    scan = scan_archive(lib.archive_path)
    if not scan.exports:
        raise HelixError(f"no exports in {lib.archive_path}")
    return list(scan.exports)


def _probe_source(export: str) -> str:
    # Zero-argument call through an unprototyped declaration; samples are
    # static-analysis targets only, so argument correctness is sacrificed.
    return (
        f"int {export}();\n"
        f"int main(void) {{ return {export}(); }}\n"
    )


def probe_build(
    lib: LibraryRecipe,
    export: str,
    lib_functions: frozenset[str] | None = None,
) -> SliceResult:
    """Compile and statically link a probe that pulls in a single export.

    On link success the slice's labels are the probe binary's defined
    function symbols restricted to the library's own function names (the
    probe is never stripped, whatever the final blueprint does).
    """
    tc = lib.toolchain
    if lib_functions is None:
        lib_functions = scan_archive(lib.archive_path).functions

    with tempfile.TemporaryDirectory(prefix="helix-probe-") as tmp:
        tmpdir = Path(tmp)
        probe_c = tmpdir / "probe.c"
        probe_c.write_text(_probe_source(export))
        probe_bin = tmpdir / "probe"
        cmd = (
            [tc.compiler_cmd]
            + tc.compile_flags()
            + [str(probe_c), str(lib.archive_path), "-o", str(probe_bin)]
            + tc.link_flags()
        )
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=tc.timeout_s
            )
        except FileNotFoundError:
            raise ToolchainError(
                f"compiler not found: {tc.compiler_cmd}"
            ) from None
        except subprocess.TimeoutExpired:
            return SliceResult(export, "discarded",
                               reason=f"timeout after {tc.timeout_s}s")
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout).strip().splitlines()[-3:]
            return SliceResult(export, "discarded",
                               reason="link failed: " + " | ".join(tail))

        binary = probe_bin.read_bytes()
        defined_funcs = {
            s.name for s in elf.read_symbols(binary)
            if s.defined and s.is_function
        }
        surviving = frozenset(defined_funcs & lib_functions) | {export}
        return SliceResult(export, "built",
                           surviving_functions=surviving,
                           binary_size=len(binary))


def archive_hash_prefix(archive_path: Path) -> str:
    """Stable rename prefix: 'h' + first 8 hex chars of the archive hash."""
    digest = hashlib.sha256(Path(archive_path).read_bytes()).hexdigest()
    return "h" + digest[:8]


def rename_symbols(lib: LibraryRecipe, prefix: str,
                   out_path: Path | None = None) -> Path:
    """Copy the archive with every global defined symbol s renamed to
    `<prefix>_s`; references to symbols outside the archive are untouched.

    Symbols already carrying the prefix are skipped, which makes repeated
    invocation with the same prefix byte-idempotent.
    """
    if not _IDENT_RE.match(prefix):
        raise HelixError(f"prefix is not a valid C identifier fragment: {prefix!r}")
    tc = lib.toolchain
    scan = scan_archive(lib.archive_path)
    if out_path is None:
        out_path = lib.archive_path.with_name(
            f"lib{lib.name}.renamed.a"
        )
    out_path = Path(out_path)

    mapping = {
        name: f"{prefix}_{name}"
        for name in sorted(scan.global_definitions)
        if not name.startswith(prefix + "_")
    }
    collisions = sorted(new for new in mapping.values() if new in scan.all_names)
    if collisions:
        raise HelixError(
            f"rename collision in {lib.name}: " + ", ".join(collisions)
        )
    if not mapping:
        shutil.copyfile(lib.archive_path, out_path)
        return out_path

    with tempfile.TemporaryDirectory(prefix="helix-rename-") as tmp:
        symfile = Path(tmp) / "redefine.txt"
        symfile.write_text(
            "".join(f"{old} {new}\n" for old, new in sorted(mapping.items()))
        )
        cmd = [
            tc.objcopy_cmd,
            "--enable-deterministic-archives",
            "--redefine-syms", str(symfile),
            str(lib.archive_path), str(out_path),
        ]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True,
                                  timeout=tc.timeout_s)
        except FileNotFoundError:
            raise ToolchainError(f"objcopy not found: {tc.objcopy_cmd}") from None
        if proc.returncode != 0:
            raise HelixError(
                f"symbol rename failed for {lib.name}: {proc.stderr.strip()}"
            )
    return out_path


def _stub_source(component_id: str, renamed_export: str, library: str) -> str:
    return (
        f"/* call stub for component {component_id} ({library}) */\n"
        f"int {renamed_export}();\n"
        f"\n"
        f"void invoke_{renamed_export}(void) {{\n"
        f"    (void){renamed_export}();\n"
        f"}}\n"
    )


@dataclass(frozen=True)
class ExtractionResult:
    components: tuple[ComponentSpec, ...]
    renamed_archive: Path
    archive_ref: str
    discarded: tuple[SliceResult, ...]


def extract_components(
    lib: LibraryRecipe,
    out_dir: Path | None = None,
    jobs: int | None = None,
) -> ExtractionResult:
    """Run the full per-library pipeline: enumerate, probe, label, rename.

    Probe builds for distinct exports run concurrently; results are merged
    in export-name order so output never depends on scheduling. Components
    with identical label sets are all kept (one component per built export).
    """
    lib.toolchain.check_available()
    scan = scan_archive(lib.archive_path)
    if not scan.exports:
        raise HelixError(f"no exports in {lib.archive_path}")

    workers = max(1, jobs or os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda export: probe_build(lib, export, scan.functions),
            scan.exports,
        ))
    discarded = [r for r in results if r.status != "built"]
    discarded += [
        SliceResult(name, "discarded", reason=reason)
        for name, reason in sorted(scan.skipped.items())
    ]

    built = [r for r in results if r.status == "built"]
    if not built:
        raise HelixError(f"library yielded no components: {lib.name}")

    prefix = archive_hash_prefix(lib.archive_path)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        renamed = rename_symbols(lib, prefix, out_dir / f"lib{lib.name}.a")
    else:
        renamed = rename_symbols(lib, prefix)
    archive_ref = "sha256:" + hashlib.sha256(renamed.read_bytes()).hexdigest()

    components = []
    for result in built:
        export = result.export_name
        component_id = f"{lib.name}-{export}"
        renamed_export = f"{prefix}_{export}"
        labels = frozenset(
            Label(lib.name, fn) for fn in result.surviving_functions
        )
        components.append(ComponentSpec(
            id=component_id,
            library_id=lib.name,
            export_name=renamed_export,
            seed_function=export,
            labels=labels,
            stub_source=_stub_source(component_id, renamed_export, lib.name),
            archive_ref=archive_ref,
        ))
    return ExtractionResult(
        components=tuple(components),
        renamed_archive=renamed,
        archive_ref=archive_ref,
        discarded=tuple(discarded),
    )
