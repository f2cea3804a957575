import json
import random

import numpy as np
import pytest

from quadwf.harness import experiments as ex
from quadwf.harness.cli import main
from quadwf.harness.config import ExperimentConfig, default_config
from quadwf.harness.ppm import PPMError, format_ppm, load_ppm, parse_ppm, save_ppm


class TestPPM:
    def test_white_pixel(self):
        channels, w, h = parse_ppm("P3 1 1 255 255 255 255")
        assert (w, h) == (1, 1)
        np.testing.assert_array_equal(channels, [[1.0], [1.0], [1.0]])

    def test_black_white(self):
        channels, w, h = parse_ppm("P3\n2 1\n255\n0 0 0\n255 255 255\n")
        assert (w, h) == (2, 1)
        for c in channels:
            np.testing.assert_array_equal(c, [0.0, 1.0])

    def test_comments(self):
        channels, _, _ = parse_ppm("P3 # magic\n1 1\n# max\n255\n10 20 30\n")
        np.testing.assert_allclose(channels[:, 0], np.array([10, 20, 30]) / 255)

    def test_round_trip_bytes(self, tmp_path):
        text = ex.bundled_image_path()
        original = open(text).read()
        assert format_ppm(*parse_ppm(original)) == original
        out = tmp_path / "copy.ppm"
        save_ppm(out, *load_ppm(text))
        assert out.read_bytes() == open(text, "rb").read()

    def test_bundled_dimensions(self):
        channels, w, h = load_ppm(ex.bundled_image_path())
        assert (w, h) == (22, 15) and channels.shape == (3, 330)
        assert np.all(channels.sum(axis=1) > 0)

    @pytest.mark.parametrize("text,line,match", [
        ("P6 1 1 255 0 0 0", 1, "magic"),
        ("P3\n1 1\n255\n0 0\n", 4, "truncated"),
        ("P3\n1 1\n255\n0 x 0\n", 4, "integer"),
        ("P3\n1 1\n255\n0 0 300\n", 4, "outside"),
        ("P3\n1 1\n15\n0 0 0\n", 3, "maxval"),
        ("P3\n1 1\n255\n0 0 0\n7\n", 5, "trailing"),
        ("P3\n0 1\n255\n", 2, "dimensions"),
    ])
    def test_errors_carry_line(self, text, line, match):
        with pytest.raises(PPMError, match=match) as info:
            parse_ppm(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)


class TestConfig:
    def test_json_round_trip(self):
        cfg = default_config("phase_transition")
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg

    def test_field_names(self):
        data = json.loads(default_config("init_closeness").to_json())
        for name in ("kind", "n", "m_over_n_grid", "q_values", "trials", "base_seed", "solver",
                     "success_tol", "output_path"):
            assert name in data

    @pytest.mark.parametrize("kwargs", [
        dict(kind="nope"), dict(kind="init_closeness", trials=0),
        dict(kind="init_closeness", q_values=[0.5]), dict(kind="init_closeness", m_over_n_grid=[]),
        dict(kind="bench_init"), dict(kind="init_closeness", solver={"eta": 1}),
        dict(kind="init_closeness", base_seed=-1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)

    def test_unknown_field(self):
        with pytest.raises(ValueError, match="unknown"):
            ExperimentConfig.from_dict({"kind": "init_closeness", "colour": 1})

    def test_full_scale(self):
        cfg = default_config("phase_transition", full=True)
        assert cfg.n == 100 and cfg.trials == 100
        assert cfg.m_over_n_grid[0] == 1.5 and cfg.m_over_n_grid[-1] == 5.5
        assert default_config("bench_init").n_grid == [500, 1000, 2000]


def tiny(kind, tmp_path, **kw):
    base = dict(kind=kind, n=6, m_over_n_grid=[2.0, 6.0], q_values=[-0.5, 0.0], trials=3,
                base_seed=17, output_path=str(tmp_path / f"{kind}.csv"))
    base.update(kw)
    return ExperimentConfig(**base)


def strip_timing(rows):
    return [{k: v for k, v in r.items() if k not in ex.TIMING_COLUMNS} for r in rows]


class TestExperiments:
    def test_trial_seed_is_order_free(self):
        a = ex.trial_seed(1, 0.0, 4.0, 3)
        assert a == ex.trial_seed(1, 0.0, 4.0, 3)
        assert len({ex.trial_seed(1, q, r, t) for q in (-1, 0) for r in (1, 2) for t in range(5)}) == 20

    def test_determinism(self, tmp_path):
        cfg = tiny("phase_transition", tmp_path)
        ex.run_experiment(cfg)
        first = ex.read_csv(cfg.output_path, drop_timing=True)
        summary = ex.read_csv(ex.summary_path(cfg.output_path), drop_timing=True)
        ex.run_experiment(cfg)
        assert ex.read_csv(cfg.output_path, drop_timing=True) == first
        assert ex.read_csv(ex.summary_path(cfg.output_path), drop_timing=True) == summary

    def test_trial_isolation(self, tmp_path):
        cfg = tiny("init_closeness", tmp_path)
        tasks = list(ex._cells(cfg))
        ordered = [ex._init_closeness_trial(t) for t in tasks]
        shuffled = tasks[:]
        random.Random(0).shuffle(shuffled)
        by_key = {(r.q, r.m_over_n, r.trial_index): r for r in map(ex._init_closeness_trial, shuffled)}
        for rec in ordered:
            other = by_key[(rec.q, rec.m_over_n, rec.trial_index)]
            assert {**vars(rec), "wall_time_ms": 0} == {**vars(other), "wall_time_ms": 0}

    def test_success_flag_recomputable(self, tmp_path):
        cfg = tiny("phase_transition", tmp_path)
        ex.run_experiment(cfg)
        rows = ex.read_csv(cfg.output_path)
        assert rows[0]["schema_version"] == "1"
        for row in rows:
            assert (row["success"] == "1") == (float(row["final_rel_distance"]) < cfg.success_tol)
            assert float(row["init_rel_distance"]) >= 0 and float(row["final_rel_distance"]) >= 0

    def test_csv_format(self, tmp_path):
        cfg = tiny("init_closeness", tmp_path, trials=1)
        ex.run_experiment(cfg)
        raw = open(cfg.output_path, "rb").read()
        assert b"\r" not in raw
        header = raw.split(b"\n")[0].decode()
        assert header.split(",")[:3] == ["schema_version", "kind", "q"]

    def test_init_comparison_pairs(self, tmp_path):
        cfg = tiny("init_comparison", tmp_path, q_values=[0.0], m_over_n_grid=[6.0], trials=2)
        recs = ex.run_init_comparison(cfg)
        assert [r.init_method for r in recs] == ["spectral", "random"] * 2
        for a, b in zip(recs[::2], recs[1::2]):
            assert a.seed == b.seed and a.m == b.m
            assert a.init_rel_distance != b.init_rel_distance

    def test_paired_ensembles_shared(self):
        seed = ex.trial_seed(5, 0.0, 3.0, 0)
        _, ens_a, _ = ex.trial_streams(seed)
        _, ens_b, _ = ex.trial_streams(seed)
        assert ens_a == ens_b

    def test_bench_small(self, tmp_path):
        cfg = tiny("bench_init", tmp_path, q_values=[0.0, -1.0], n_grid=[8, 12], m_over_n_grid=[4.0],
                   trials=2)
        recs = ex.run_bench_init(cfg)
        assert len(recs) == 2 * 2 * 2 * 2
        for r in recs:
            assert r.init_method in ("svd", "power") and r.wall_time_ms >= 0
        pairs = zip(recs[::2], recs[1::2])
        for svd, power in pairs:
            assert abs(svd.init_rel_distance - power.init_rel_distance) < 0.3

    def test_image_small(self, tmp_path):
        rng = np.random.default_rng(0)
        img = tmp_path / "tiny.ppm"
        save_ppm(img, rng.uniform(0.2, 1.0, size=(3, 12)), 4, 3)
        cfg = ExperimentConfig("image_recovery", n=12, m_over_n_grid=[6.0], trials=1,
                               solver={"tol_mode": "absolute"}, output_path=str(tmp_path / "img.csv"))
        recs = ex.run_experiment(cfg, image_path=str(img))
        assert [r.channel for r in recs] == ["R", "G", "B", "all"]
        assert all(r.final_rel_error < 1e-5 for r in recs)
        out, w, h = load_ppm(tmp_path / "img_m6.ppm")
        assert (w, h) == (4, 3)
        assert (tmp_path / "img_m6_init.ppm").exists()

    def test_transition_midpoint(self):
        assert ex.transition_midpoint([1, 2, 3], [0.0, 0.4, 0.8]) == pytest.approx(2.25)
        assert ex.transition_midpoint([1, 2], [0.6, 1.0]) == 1.0
        assert ex.transition_midpoint([1, 2], [0.0, 0.1]) is None

    def test_parallel_matches_serial(self, tmp_path):
        cfg = tiny("init_closeness", tmp_path, trials=2)
        serial = ex.run_init_closeness(cfg)
        parallel = ex.run_init_closeness(cfg.with_overrides(n_jobs=2))
        assert [r.init_rel_distance for r in serial] == [r.init_rel_distance for r in parallel]


@pytest.mark.slow
def test_init_closeness_desk_trend(tmp_path):
    cfg = default_config("init_closeness").with_overrides(output_path=str(tmp_path / "ic.csv"))
    rows = ex.summarize(ex.run_init_closeness(cfg))
    for q in cfg.q_values:
        curve = [r["mean_init_rel_distance"] for r in rows if r["q"] == q]
        rises = [b / a - 1 for a, b in zip(curve, curve[1:]) if b > a]
        assert len(rises) <= 1 and all(r <= 0.02 for r in rises)
        assert curve[0] > curve[-1]


class TestCLI:
    def write_cfg(self, tmp_path, **kw):
        cfg = tiny(kw.pop("kind"), tmp_path, **kw)
        path = tmp_path / "cfg.json"
        path.write_text(cfg.to_json())
        return path

    @pytest.mark.parametrize("sub,kind,extra", [
        ("init-closeness", "init_closeness", {}),
        ("phase-transition", "phase_transition", {}),
        ("init-compare", "init_comparison", {}),
        ("bench-init", "bench_init", {"n_grid": [6]}),
    ])
    def test_subcommands(self, tmp_path, capsys, sub, kind, extra):
        cfg = self.write_cfg(tmp_path, kind=kind, trials=1, **extra)
        out = tmp_path / "out" / "r.csv"
        assert main([sub, "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
        rows = ex.read_csv(out)
        assert rows and all(r["kind"] == kind for r in rows)
        assert ex.summary_path(out).exists()
        assert "wrote" in capsys.readouterr().out

    def test_image_subcommand(self, tmp_path):
        img = tmp_path / "i.ppm"
        save_ppm(img, np.full((3, 6), 0.5), 3, 2)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"kind": "image_recovery", "n": 6, "m_over_n_grid": [5.0],
                                   "trials": 1, "solver": {"tol_mode": "absolute"}}))
        out = tmp_path / "img.csv"
        assert main(["image", "--config", str(cfg), "--out", str(out), "--image", str(img)]) == 0
        assert len(ex.read_csv(out)) == 4

    def test_seed_override_changes_output(self, tmp_path):
        cfg = self.write_cfg(tmp_path, kind="init_closeness", trials=1)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["init-closeness", "--config", str(cfg), "--out", str(a), "--seed", "1"])
        main(["init-closeness", "--config", str(cfg), "--out", str(b), "--seed", "2"])
        assert ex.read_csv(a, True) != ex.read_csv(b, True)

    def test_kind_mismatch(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, kind="init_closeness")
        assert main(["phase-transition", "--config", str(cfg)]) == 2
        assert "does not match" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, kind="init_closeness", trials=1)
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["init-closeness", "--config", str(cfg), "--out", str(blocker / "r.csv")]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_ppm_reports_line(self, tmp_path, capsys):
        img = tmp_path / "bad.ppm"
        img.write_text("P3\n2 1\n255\n0 0 0\n")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"kind": "image_recovery", "n": 2}))
        assert main(["image", "--config", str(cfg), "--out", str(tmp_path / "o.csv"),
                     "--image", str(img)]) == 2
        assert "line 4" in capsys.readouterr().err

    def test_help(self, capsys):
        with pytest.raises(SystemExit):
            main(["--help"])
        assert "phase-transition" in capsys.readouterr().out
