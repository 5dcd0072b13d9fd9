"""Command-line interface: exit codes, guards, run configs, end-to-end."""
from __future__ import annotations

import json
import math

import pytest

from helixkit.cli import main
from helixkit.generator import read_manifest, write_manifest

from test_evaluator import blob, build_manifest


class TestCapacity:
    def test_small_value_exact(self, capsys):
        assert main(["capacity", "4", "2"]) == 0
        assert capsys.readouterr().out == "6\n"

    def test_moderate_value_exact(self, capsys):
        assert main(["capacity", "100", "3"]) == 0
        assert capsys.readouterr().out == f"{math.comb(100, 3)}\n"

    def test_large_value_approximate(self, capsys):
        assert main(["capacity", "268", "50"]) == 0
        assert capsys.readouterr().out == "≈ 6.36e54\n"

    def test_threshold_to_scientific(self, capsys):
        assert main(["capacity", "40", "20"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("≈ 1.38e11")

    def test_n_exceeding_libraries(self, capsys):
        assert main(["capacity", "3", "4"]) == 2
        assert "error:" in capsys.readouterr().err


def write_synthetic_dataset(tmp_path, sample_count=3):
    spec = {}
    for i in range(sample_count):
        labels = [("liba", "f0")] if i % 2 == 0 else [("libb", "f1")]
        spec[f"s{i:04d}"] = (blob(500 + i), labels)
    manifest = build_manifest(tmp_path, spec)
    write_manifest(manifest, tmp_path / "manifest.json")
    return manifest


class TestEvaluate:
    def test_happy_path(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["evaluate", "--dataset", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].split() == ["metric", "mae", "errors"]
        assert out.rstrip().endswith("pairs: 3")
        report = json.loads((tmp_path / "report.json").read_text())
        assert set(report["mae"]) == {"ctph", "tlsh", "lzjd", "naive"}
        assert report["pair_count"] == 3
        assert report["params"] == {"tlsh_dmax": 300, "lzjd_k": 1024}
        run = json.loads((tmp_path / "run.json").read_text())
        assert run["subcommand"] == "evaluate"
        assert run["options"]["metrics"] == ["ctph", "tlsh", "lzjd", "naive"]
        assert "HELIX_CC" in run["env"]

    def test_metric_subset(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["evaluate", "--dataset", str(tmp_path),
                     "--metrics", "naive,lzjd"]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert set(report["mae"]) == {"naive", "lzjd"}

    def test_unknown_metric(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["evaluate", "--dataset", str(tmp_path),
                     "--metrics", "naive,bogus"]) == 2
        assert "unknown metrics: bogus" in capsys.readouterr().err

    def test_existing_report_needs_force(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["evaluate", "--dataset", str(tmp_path)]) == 0
        capsys.readouterr()
        assert main(["evaluate", "--dataset", str(tmp_path)]) == 2
        assert "use --force" in capsys.readouterr().err
        assert main(["evaluate", "--dataset", str(tmp_path), "--force"]) == 0

    def test_external_scores_merged(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text(
            "id_a,id_b,score\n"
            "s0000,s0001,0.25\ns0000,s0002,0.75\ns0001,s0002,0.5\n"
        )
        assert main(["evaluate", "--dataset", str(tmp_path),
                     "--metrics", "naive",
                     "--external", f"mytool={csv_path}"]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert "mytool" in report["mae"]
        assert report["errors"]["mytool"] == 0

    def test_bad_external_spec(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["evaluate", "--dataset", str(tmp_path),
                     "--external", "justaname"]) == 2
        assert "name=file" in capsys.readouterr().err

    def test_missing_dataset(self, tmp_path, capsys):
        assert main(["evaluate", "--dataset", str(tmp_path / "nope")]) == 2
        assert "unreadable manifest" in capsys.readouterr().err

    def test_custom_report_path(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        report_path = tmp_path / "reports" / "eval.json"
        assert main(["evaluate", "--dataset", str(tmp_path),
                     "--report", str(report_path)]) == 0
        assert report_path.is_file()
        assert (tmp_path / "reports" / "run.json").is_file()


class TestInspect:
    def test_dataset_directory(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["inspect", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("dataset: 3 samples")
        assert "sample s0000" in out

    def test_manifest_file_directly(self, tmp_path, capsys):
        write_synthetic_dataset(tmp_path)
        assert main(["inspect", str(tmp_path / "manifest.json")]) == 0
        assert "dataset: 3 samples" in capsys.readouterr().out

    def test_unrecognized_path(self, tmp_path, capsys):
        assert main(["inspect", str(tmp_path)]) == 2
        assert "unrecognized path contents" in capsys.readouterr().err

    def test_corpus_directory(self, fixture_corpus_dir, capsys):
        assert main(["inspect", str(fixture_corpus_dir)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("corpus sha256:")
        assert "library tinymath (version 0): 2 components" in out
        assert "    tinymath-helper_internal" in out

    def test_single_library_directory(self, fixture_corpus_dir, capsys):
        assert main(["inspect", str(fixture_corpus_dir / "vecmath")]) == 0
        out = capsys.readouterr().out
        assert out.startswith("library vecmath")
        assert "component vecmath-vm_norm" in out


class TestExtractGuards:
    def test_missing_compiler_is_environment_error(self, tmp_path, capsys,
                                                   monkeypatch):
        monkeypatch.setenv("HELIX_CC", "definitely-not-a-compiler")
        rc = main(["extract", "--recipes", str(tmp_path / "r.toml"),
                   "--out", str(tmp_path / "out")])
        assert rc == 3
        assert "environment error" in capsys.readouterr().err

    def test_non_empty_out_dir_refused(self, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        (out / "junk.txt").write_text("leftover")
        rc = main(["extract", "--recipes", str(tmp_path / "r.toml"),
                   "--out", str(out)])
        assert rc == 2
        assert "use --force" in capsys.readouterr().err

    def test_duplicate_recipe_names(self, fixture_tree, toolchain, tmp_path,
                                    capsys):
        recipe = str(fixture_tree["tinymath"])
        rc = main(["extract", "--recipes", recipe, recipe,
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "duplicate library names" in capsys.readouterr().err


class TestGenerateGuards:
    def test_non_empty_out_dir_refused(self, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        (out / "junk.txt").write_text("leftover")
        rc = main(["generate", "--corpus", str(tmp_path), "-n", "2",
                   "-p", "0.5", "--count", "2", "--seed", "1",
                   "--out", str(out)])
        assert rc == 2
        assert "use --force" in capsys.readouterr().err

    def test_invalid_p_rejected(self, fixture_corpus_dir, tmp_path, capsys):
        rc = main(["generate", "--corpus", str(fixture_corpus_dir),
                   "-n", "2", "-p", "1.5", "--count", "2", "--seed", "1",
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "p must lie in [0, 1]" in capsys.readouterr().err

    def test_exhaustion_reports_partial_manifest(self, fixture_corpus_dir,
                                                 tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["generate", "--corpus", str(fixture_corpus_dir),
                   "-n", "2", "-p", "0.5", "--count", "3", "--seed", "1",
                   "--max-attempts", "1", "--out", str(out)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "generation exhausted" in err
        assert "partial manifest kept at" in err
        manifest = read_manifest(out / "manifest.json")
        assert len(manifest.samples) == 1


@pytest.mark.usefixtures("toolchain")
class TestEndToEnd:
    def test_extract_generate_evaluate(self, fixture_tree, tmp_path, capsys):
        corpus_dir = tmp_path / "corpus"
        recipes = [str(fixture_tree[name])
                   for name in ("tinymath", "strtool", "crcbits", "mixlib")]
        assert main(["extract", "--recipes", *recipes,
                     "--out", str(corpus_dir), "--jobs", "2"]) == 0
        out = capsys.readouterr().out
        assert "library tinymath: 2 components, 0 discarded" in out
        assert "library mixlib: 4 components, 1 discarded" in out
        assert (corpus_dir / "run.json").is_file()

        dataset_dir = tmp_path / "dataset"
        assert main(["generate", "--corpus", str(corpus_dir),
                     "-n", "2", "-p", "0.5", "--count", "8", "--seed", "11",
                     "--out", str(dataset_dir), "--jobs", "2"]) == 0
        out = capsys.readouterr().out
        assert "samples: 8" in out
        run = json.loads((dataset_dir / "run.json").read_text())
        assert run["subcommand"] == "generate"
        assert run["options"]["seed"] == 11

        assert main(["evaluate", "--dataset", str(dataset_dir)]) == 0
        out = capsys.readouterr().out
        assert out.rstrip().endswith("pairs: 28")
        report = json.loads((dataset_dir / "report.json").read_text())
        assert report["pair_count"] == 28
        for name in ("ctph", "tlsh", "lzjd", "naive"):
            assert 0.0 <= report["mae"][name] <= 1.0

        assert main(["inspect", str(dataset_dir)]) == 0
        assert "dataset: 8 samples" in capsys.readouterr().out

    def test_broken_recipe_skipped_others_proceed(self, fixture_tree,
                                                  tmp_path, capsys):
        bad_dir = tmp_path / "badrecipe"
        bad_dir.mkdir()
        (bad_dir / "local.c").write_text(
            "static int hidden(void) { return 1; }\n"
            "static int use(void) { return hidden(); }\n"
        )
        (bad_dir / "noexports.toml").write_text(
            'name = "noexports"\n'
            'build_cmd = "$CC -c local.c && ar rcsD libnoexports.a local.o"\n'
            'artifact = "libnoexports.a"\n'
        )
        corpus_dir = tmp_path / "corpus"
        rc = main(["extract",
                   "--recipes", str(bad_dir / "noexports.toml"),
                   str(fixture_tree["tinymath"]),
                   "--out", str(corpus_dir), "--jobs", "2"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "library noexports: skipped" in captured.err
        assert "no exports" in captured.err
        assert "library tinymath: 2 components" in captured.out
        assert not (corpus_dir / "noexports").exists()

    def test_all_recipes_skipped_is_domain_error(self, tmp_path, capsys):
        bad_dir = tmp_path / "badrecipe"
        bad_dir.mkdir()
        (bad_dir / "bad.toml").write_text(
            'name = "bad"\nbuild_cmd = "exit 1"\nartifact = "libbad.a"\n')
        rc = main(["extract", "--recipes", str(bad_dir / "bad.toml"),
                   "--out", str(tmp_path / "corpus")])
        captured = capsys.readouterr()
        assert rc == 2
        assert "no components extracted" in captured.err


def test_console_script_installed():
    import subprocess
    proc = subprocess.run(["helixkit", "capacity", "4", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "6\n"
