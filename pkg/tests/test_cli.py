"""End-to-end command-line tests: exit codes, files, determinism."""

import json

import pytest

from hbselect.cli import main
from hbselect.datakit import load_csv, load_groups


def run(argv):
    return main(argv)


def gen_args(out_dir, seed=7, sigma=0.0, n=300, support=6):
    return [
        "generate",
        "--out-dir", str(out_dir),
        "--n", str(n),
        "--p-demo", "3",
        "--p-large", "2",
        "--p-medium", "3",
        "--p-small", "4",
        "--support-size", str(support),
        "--mode", "strong",
        "--sigma", str(sigma),
        "--seed", str(seed),
        "--coef-scale", "2.0",
    ]


def scrub(payload):
    """Drop wall-clock fields excluded from the determinism contract."""
    if isinstance(payload, dict):
        return {
            k: scrub(v)
            for k, v in payload.items()
            if k not in ("started_utc", "finished_utc", "wall_time_s", "time_s")
        }
    if isinstance(payload, list):
        return [scrub(v) for v in payload]
    return payload


@pytest.fixture
def generated(tmp_path):
    out = tmp_path / "data"
    assert run(gen_args(out)) == 0
    return out


def data_flags(out):
    return [
        "--data", str(out / "data.csv"),
        "--groups", str(out / "groups.csv"),
        "--hierarchy", str(out / "hierarchy.csv"),
    ]


class TestGenerate:
    def test_same_seed_identical_files(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(gen_args(a)) == 0
        assert run(gen_args(b)) == 0
        for name in ("data.csv", "groups.csv", "hierarchy.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        ta = scrub(json.loads((a / "truth.json").read_text()))
        tb = scrub(json.loads((b / "truth.json").read_text()))
        # Manifests embed the out-dir flag; drop it before comparing.
        ta["manifest"]["flags"].pop("out_dir")
        tb["manifest"]["flags"].pop("out_dir")
        assert ta == tb

    def test_truth_support_is_hierarchy_feasible(self, generated):
        truth = json.loads((generated / "truth.json").read_text())
        groups = load_groups(generated / "groups.csv")
        dataset = load_csv(generated / "data.csv", groups)
        from hbselect.datakit import check_support_feasible, load_hierarchy

        hierarchy = load_hierarchy(generated / "hierarchy.csv", dataset)
        support = {dataset.index_of(name) for name in truth["coefficients"]}
        assert check_support_feasible(support, hierarchy.triples, "strong")

    def test_infeasible_config_exits_4(self, tmp_path):
        cfg = {
            "n": 10, "p_demo": 0, "p_large": 1, "p_medium": 1, "p_small": 1,
            "support": [2], "coefs": [1.0], "hierarchy_mode": "strong", "seed": 0,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run(["generate", "--out-dir", str(tmp_path / "x"), "--config", str(path)])
        assert code == 4


class TestSelect:
    def test_select_weak_with_limits(self, generated, tmp_path, capsys):
        out_json = tmp_path / "res.json"
        code = run(
            ["select", "--method", "weak", "--s", "6", "--time-limit", "10000",
             *data_flags(generated), "--json", str(out_json)]
        )
        assert code == 0
        payload = json.loads(out_json.read_text())
        for key in ("method", "mode", "s", "rss", "proven_optimal", "best_bound",
                    "wall_time_s", "nodes", "intercept", "coefficients", "selected",
                    "manifest"):
            assert key in payload
        assert payload["mode"] == "weak"
        table = capsys.readouterr().out
        assert "intercept" in table

    def test_end_to_end_recovery_on_noiseless_data(self, generated, tmp_path):
        truth = json.loads((generated / "truth.json").read_text())
        out_json = tmp_path / "res.json"
        code = run(
            ["select", "--method", "strong", "--s", str(len(truth["coefficients"])),
             *data_flags(generated), "--json", str(out_json)]
        )
        assert code == 0
        payload = json.loads(out_json.read_text())
        assert payload["proven_optimal"] is True
        assert sorted(payload["selected"]) == sorted(truth["coefficients"])

    def test_full_ols_table(self, generated, capsys):
        code = run(["select", "--method", "basic", "--s", "12", *data_flags(generated)])
        assert code == 0
        out = capsys.readouterr().out
        assert "coefficient" in out and "intercept" in out

    def test_strong_without_hierarchy_is_usage_error(self, generated):
        code = run(
            ["select", "--method", "strong", "--s", "3",
             "--data", str(generated / "data.csv"),
             "--groups", str(generated / "groups.csv")]
        )
        assert code == 2

    def test_validation_error_exits_3(self, tmp_path, generated):
        bad = tmp_path / "bad.csv"
        bad.write_text("y,large_00\n0,1\n")
        code = run(
            ["select", "--method", "basic", "--s", "1",
             "--data", str(bad), "--groups", str(generated / "groups.csv")]
        )
        assert code == 3

    def test_stepwise_and_l1_paths(self, generated):
        for method in ("stepwise", "l1"):
            assert run(["select", "--method", method, "--s", "3", *data_flags(generated)]) == 0


class TestCvCompare:
    def test_cv_json(self, generated, tmp_path):
        out_json = tmp_path / "cv.json"
        code = run(
            ["cv", "--method", "basic", "--s", "3", "--k", "3",
             *data_flags(generated), "--json", str(out_json), "--threads", "1"]
        )
        assert code == 0
        payload = json.loads(out_json.read_text())
        assert payload["schema"] == "cvreport/1"
        assert len(payload["rows"][0]["folds"]) == 3

    def test_k_one_is_usage_error(self, generated):
        code = run(
            ["cv", "--method", "basic", "--s", "2", "--k", "1", *data_flags(generated)]
        )
        assert code == 2

    def test_compare_table_and_json(self, generated, tmp_path, capsys):
        out_json = tmp_path / "cmp.json"
        code = run(
            ["compare", "--methods", "stepwise,basic,strong", "--s-list", "2,4",
             "--k", "3", *data_flags(generated), "--json", str(out_json), "--threads", "1"]
        )
        assert code == 0
        table = capsys.readouterr().out
        assert "method" in table and "RMSE" in table
        payload = json.loads(out_json.read_text())
        assert payload["schema"] == "cvreport/1"
        assert len(payload["rows"]) == 3 * 2

    def test_unknown_method_usage_error(self, generated):
        code = run(["compare", "--methods", "ridge", "--s-list", "2", *data_flags(generated)])
        assert code == 2

    def test_seed_determinism_modulo_timestamps(self, generated, tmp_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            path = tmp_path / name
            code = run(
                ["compare", "--methods", "basic,strong", "--s-list", "2", "--k", "3",
                 "--seed", "9", *data_flags(generated), "--json", str(path), "--threads", "1"]
            )
            assert code == 0
            payload = scrub(json.loads(path.read_text()))
            payload["manifest"]["flags"].pop("json")
            outs.append(json.dumps(payload, sort_keys=True))
        assert outs[0] == outs[1]
