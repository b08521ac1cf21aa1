"""CLI subcommands: pipeline chaining, config defaults, error contract."""


import numpy as np
import pytest
from click.testing import CliRunner

from splatlift import Assignment, ContributionMatrix, load_mask_png
from splatlift.cli import main


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    """A small two-cluster fixture laid out by the synth subcommand."""
    out = tmp_path_factory.mktemp("fixture")
    runner = CliRunner()
    result = runner.invoke(main, [
        "synth", "--seed", "5", "--gaussians", "300", "--views", "8",
        "--width", "48", "--height", "48", "--mask-views", "4",
        "--preset", "two-cluster", "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


class TestSynth:
    def test_layout(self, fixture_dir):
        assert (fixture_dir / "scene.ply").exists()
        assert (fixture_dir / "cameras.json").exists()
        assert len(list((fixture_dir / "masks").glob("*.png"))) == 4
        assert len(list((fixture_dir / "gt_masks").glob("*.png"))) == 8

    def test_rerun_with_same_seed_is_byte_identical(self, tmp_path):
        runner = CliRunner()
        for sub in ("a", "b"):
            result = runner.invoke(main, [
                "synth", "--seed", "9", "--gaussians", "40", "--views", "3",
                "--width", "16", "--height", "16", "--preset", "random",
                "--out", str(tmp_path / sub)])
            assert result.exit_code == 0, result.output
        for name in ("scene.ply", "cameras.json"):
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes())
        for png in sorted((tmp_path / "a" / "masks").glob("*.png")):
            twin = tmp_path / "b" / "masks" / png.name
            assert np.array_equal(load_mask_png(png), load_mask_png(twin))


class TestPipeline:
    def test_accumulate_assign_render_eval(self, fixture_dir, tmp_path):
        runner = CliRunner()
        matrix_path = tmp_path / "A.bin"
        result = runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(fixture_dir / "masks"),
            "--num-objects", "2", "--out", str(matrix_path)])
        assert result.exit_code == 0, result.output
        matrix = ContributionMatrix.load(matrix_path)
        assert matrix.num_objects == 2 and matrix.num_gaussians == 300

        assign_path = tmp_path / "assign.bin"
        result = runner.invoke(main, [
            "assign", str(matrix_path), "--gamma", "0",
            "--mode", "binary", "--out", str(assign_path)])
        assert result.exit_code == 0, result.output
        assert "object 1:" in result.output

        masks_out = tmp_path / "rendered"
        result = runner.invoke(main, [
            "render-mask", str(fixture_dir / "scene.ply"), str(assign_path),
            str(fixture_dir / "cameras.json"), "--views", "all",
            "--tau", "0.1", "--out", str(masks_out)])
        assert result.exit_code == 0, result.output
        assert len(list(masks_out.glob("*.png"))) == 8

        result = runner.invoke(main, [
            "eval", str(masks_out), str(fixture_dir / "gt_masks")])
        assert result.exit_code == 0, result.output
        miou = float([ln for ln in result.output.splitlines()
                      if ln.startswith("mIoU")][0].split()[1])
        assert miou >= 95.0

    def test_eval_pred_equals_gt_scores_100(self, fixture_dir):
        runner = CliRunner()
        result = runner.invoke(main, [
            "eval", str(fixture_dir / "gt_masks"), str(fixture_dir / "gt_masks")])
        assert result.exit_code == 0
        assert "mIoU 100.00" in result.output
        assert "mAcc 100.00" in result.output

    def test_gamma_monotone_member_counts(self, fixture_dir, tmp_path):
        runner = CliRunner()
        matrix_path = tmp_path / "A.bin"
        runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(fixture_dir / "masks"),
            "--num-objects", "2", "--out", str(matrix_path)])
        counts = []
        for gamma in ("0", "0.8"):
            out = tmp_path / f"assign_{gamma}.bin"
            result = runner.invoke(main, [
                "assign", str(matrix_path), "--gamma", gamma, "--out", str(out)])
            assert result.exit_code == 0
            counts.append(Assignment.load(out).member_counts()[1])
        assert counts[1] <= counts[0]

    def test_remove_writes_reloadable_ply(self, fixture_dir, tmp_path):
        runner = CliRunner()
        matrix_path = tmp_path / "A.bin"
        runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(fixture_dir / "masks"),
            "--num-objects", "2", "--out", str(matrix_path)])
        assign_path = tmp_path / "assign.bin"
        runner.invoke(main, [
            "assign", str(matrix_path), "--gamma", "-0.4",
            "--mode", "scene", "--out", str(assign_path)])
        edited = tmp_path / "edited.ply"
        result = runner.invoke(main, [
            "remove", str(fixture_dir / "scene.ply"), str(assign_path),
            "--objects", "1", "--out", str(edited)])
        assert result.exit_code == 0, result.output
        from splatlift import load_scene_ply
        kept = load_scene_ply(edited)
        assert 0 < len(kept) < 300


class TestErrorContract:
    def test_unknown_view_single_line_error(self, fixture_dir, tmp_path):
        runner = CliRunner()
        matrix_path = tmp_path / "A.bin"
        runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(fixture_dir / "masks"),
            "--num-objects", "2", "--out", str(matrix_path)])
        assign_path = tmp_path / "assign.bin"
        runner.invoke(main, [
            "assign", str(matrix_path), "--out", str(assign_path)])
        result = runner.invoke(main, [
            "render-mask", str(fixture_dir / "scene.ply"), str(assign_path),
            str(fixture_dir / "cameras.json"), "--views", "99",
            "--out", str(tmp_path / "x")])
        assert result.exit_code == 2
        err_lines = [ln for ln in result.output.splitlines() if ln]
        assert len(err_lines) == 1
        assert err_lines[0].startswith("error: ")

    def test_gamma_out_of_range_errors(self, fixture_dir, tmp_path):
        runner = CliRunner()
        matrix_path = tmp_path / "A.bin"
        runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(fixture_dir / "masks"),
            "--num-objects", "2", "--out", str(matrix_path)])
        result = runner.invoke(main, [
            "assign", str(matrix_path), "--gamma", "3",
            "--out", str(tmp_path / "a.bin")])
        assert result.exit_code == 2
        assert result.output.startswith("error: gamma")

    def test_empty_mask_dir_errors(self, fixture_dir, tmp_path):
        runner = CliRunner()
        empty = tmp_path / "nomasks"
        empty.mkdir()
        result = runner.invoke(main, [
            "accumulate", str(fixture_dir / "scene.ply"),
            str(fixture_dir / "cameras.json"), str(empty),
            "--num-objects", "2", "--out", str(tmp_path / "A.bin")])
        assert result.exit_code == 2
        assert result.output.startswith("error: ")


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "synth.cfg"
        cfg.write_text("seed=3\ngaussians=25\nviews=2\npreset=random\n"
                       "width=16\nheight=16\n")
        runner = CliRunner()
        result = runner.invoke(main, [
            "--config", str(cfg), "synth", "--out", str(tmp_path / "fx")])
        assert result.exit_code == 0, result.output
        assert "seed 3" in result.output and "N=25" in result.output

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "synth.cfg"
        cfg.write_text("seed=3\ngaussians=25\nviews=2\npreset=random\n"
                       "width=16\nheight=16\n")
        runner = CliRunner()
        result = runner.invoke(main, [
            "--config", str(cfg), "synth", "--seed", "8",
            "--out", str(tmp_path / "fx2")])
        assert result.exit_code == 0, result.output
        assert "seed 8" in result.output

    def test_malformed_config_errors(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a pair\n")
        runner = CliRunner()
        result = runner.invoke(main, ["--config", str(cfg), "synth",
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code == 2
        assert result.output.startswith("error: ")
