"""Shared fixtures: fixture-library corpus extraction and cached datasets.

Toolchain-dependent fixtures skip cleanly when no C compiler is present;
set HELIX_REQUIRE_TOOLCHAIN=1 (pinned-toolchain CI) to turn those skips
into failures so a broken compiler cannot silently disable coverage.
"""
from __future__ import annotations

import os
import shutil
import time

import pytest

from helixkit import corpus as corpus_mod
from helixkit import generator as generator_mod
from helixkit import recipes as recipes_mod
from helixkit import slicer as slicer_mod

from fixture_libs import FIXTURES, write_fixture_tree


def _toolchain_present() -> bool:
    tools = (
        os.environ.get("HELIX_CC", "cc"),
        os.environ.get("HELIX_OBJCOPY", "objcopy"),
        "ar",
        "sh",
    )
    return all(shutil.which(t) for t in tools)


TOOLCHAIN_OK = _toolchain_present()
REQUIRE_TOOLCHAIN = os.environ.get("HELIX_REQUIRE_TOOLCHAIN") == "1"


@pytest.fixture(scope="session")
def toolchain_gate():
    """Gate for tests that invoke the real compiler."""
    if TOOLCHAIN_OK:
        return
    if REQUIRE_TOOLCHAIN:
        pytest.fail(
            "C toolchain unavailable but HELIX_REQUIRE_TOOLCHAIN=1 is set"
        )
    pytest.skip("C toolchain not available")


@pytest.fixture(scope="session")
def toolchain(toolchain_gate) -> slicer_mod.ToolchainConfig:
    return slicer_mod.ToolchainConfig.from_env()


@pytest.fixture(scope="session")
def fixture_tree(toolchain_gate, tmp_path_factory):
    """Fixture library sources + recipes on disk: {name: recipe path}."""
    root = tmp_path_factory.mktemp("fixture-src")
    return write_fixture_tree(root)


@pytest.fixture(scope="session")
def fixture_extractions(fixture_tree, toolchain, tmp_path_factory):
    """Realize and slice every fixture library once per session.

    Returns {name: (LibraryRecipe, ExtractionResult)}.
    """
    scratch = tmp_path_factory.mktemp("extract-scratch")
    results = {}
    for name, recipe_path in sorted(fixture_tree.items()):
        recipe = recipes_mod.load_recipe(recipe_path)
        lib = recipes_mod.realize_recipe(recipe, toolchain, scratch / name)
        result = slicer_mod.extract_components(lib, out_dir=scratch / name)
        results[name] = (lib, result)
    return results


@pytest.fixture(scope="session")
def fixture_corpus_dir(fixture_extractions, tmp_path_factory):
    """The extracted fixture libraries as an on-disk corpus."""
    corpus_root = tmp_path_factory.mktemp("corpus")
    for name, (_, result) in sorted(fixture_extractions.items()):
        corpus_mod.write_library(corpus_root, name, "0", result)
    return corpus_root


@pytest.fixture(scope="session")
def fixture_corpus(fixture_corpus_dir) -> corpus_mod.Corpus:
    return corpus_mod.load_corpus(fixture_corpus_dir)


def make_dataset(corpus, out_dir, *, n=3, p=0.5, count=16, seed=7,
                 jobs=1, max_attempts=None):
    """Run the generator with fixture-friendly defaults, returning the
    manifest and the elapsed wall time."""
    config = generator_mod.GeneratorConfig(
        n=n, p=p, count=count, seed=seed, max_attempts=max_attempts
    )
    started = time.monotonic()
    manifest = generator_mod.generate(corpus, config, out_dir, jobs=jobs)
    return manifest, time.monotonic() - started


@pytest.fixture(scope="session")
def dataset_64(fixture_corpus, tmp_path_factory):
    """64 samples, n=3, p=0.5, seed 7: shared by ranking and throughput
    checks. Returns (manifest, elapsed seconds)."""
    out = tmp_path_factory.mktemp("ds64")
    return make_dataset(fixture_corpus, out, count=64,
                        jobs=os.cpu_count() or 1)
