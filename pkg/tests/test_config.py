"""Конфігурація запуску: типові значення, файл, оточення, прапорці."""

import pytest

from system.exceptions import ExitCode, SmoothingErrorCode
from system.models import CvCriterion, ErrorLaw, Method
from tools.config import Config, ConfigError, RunConfig, RunConfigLoader


def _write(tmp_path, text: str):
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestDefaults:
    def test_documented_defaults(self):
        cfg = RunConfig()
        assert cfg.method == Method.ROB1
        assert cfg.rho0_c == pytest.approx(1.54764)
        assert cfg.rho1_c == pytest.approx(4.685)
        assert cfg.s_b == 0.5
        assert cfg.cv_folds == "5"
        assert cfg.mc_reps == 500 and cfg.mc_n == 100 and cfg.mc_pred == 100

    def test_default_scenario(self):
        (sc,) = RunConfig().scenarios()
        assert sc.alpha.alpha == [5.0, 7.0, 1.0]
        assert sc.h == 2.0
        assert sc.error_law == ErrorLaw()

    def test_estimator_degree_follows_method(self):
        est = RunConfig(method=Method.ROB0).estimator()
        assert est.smoother.local_poly_degree.value == "constant"


class TestFile:
    def test_echo_reproduces_config(self, tmp_path):
        original = RunConfig.resolve(cli={"method": "cl1", "h": 0.22, "cv_folds": "loo", "mc_contamination": "0:0,0.1:10"})
        path = _write(tmp_path, "\n".join(original.to_lines()) + "\n")
        assert RunConfig.resolve(RunConfigLoader.load(path)) == original

    def test_worker_count_is_not_echoed(self):
        lines = RunConfig.resolve(cli={"threads": 4, "seed": 11}).to_lines()
        assert "SEED=11" in lines
        assert not any(line.startswith("THREADS=") for line in lines)

    def test_unknown_key_is_named(self, tmp_path):
        path = _write(tmp_path, "SCHEMA_VERSION=1\nBANDWIDTH=0.3\n")
        with pytest.raises(ConfigError) as e:
            RunConfig.resolve(RunConfigLoader.load(path))
        assert e.value.key == "BANDWIDTH"
        assert e.value.exit_code == ExitCode.USAGE

    def test_schema_version_required(self, tmp_path):
        path = _write(tmp_path, "METHOD=cl1\n")
        with pytest.raises(ConfigError) as e:
            RunConfigLoader.load(path)
        assert e.value.key == "SCHEMA_VERSION"

    def test_unsupported_schema_version(self):
        with pytest.raises(ConfigError) as e:
            RunConfig.resolve({"SCHEMA_VERSION": "2"})
        assert e.value.key == "SCHEMA_VERSION"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfigLoader.load(str(tmp_path / "absent.cfg"))

    def test_list_values(self, tmp_path):
        path = _write(tmp_path, "SCHEMA_VERSION=1\nCV_GRID=0.1,0.22,0.5\nCV_CRITERION=ls_cv\nMC_ESTIMATORS=cl1,rob1\n")
        cfg = RunConfig.resolve(RunConfigLoader.load(path))
        assert cfg.cv_grid == [0.1, 0.22, 0.5]
        assert cfg.cv_config().criterion == CvCriterion.LS_CV
        assert cfg.mc_estimators == [Method.CL1, Method.ROB1]


class TestPrecedence:
    def test_environment_over_file_and_flags_over_environment(self, monkeypatch):
        monkeypatch.setenv("COMPOSIT_SEED", "7")
        env = Config()
        file_values = {"SCHEMA_VERSION": "1", "SEED": "3"}
        assert RunConfig.resolve(file_values, env).seed == 7
        assert RunConfig.resolve(file_values, env, {"seed": 9}).seed == 9

    def test_unset_flags_do_not_override(self):
        cfg = RunConfig.resolve({"SCHEMA_VERSION": "1", "H": "0.3"}, cli={"h": None})
        assert cfg.h == 0.3

    def test_bad_environment_value(self, monkeypatch):
        monkeypatch.setenv("COMPOSIT_THREADS", "many")
        with pytest.raises(ConfigError) as e:
            Config()
        assert e.value.key == "COMPOSIT_THREADS"


class TestScenarios:
    def test_one_scenario_per_law(self):
        cfg = RunConfig.resolve(cli={"mc_contamination": "0:0,0.1:10,0.1:5", "mc_h": 1.5})
        labels = [sc.label for sc in cfg.scenarios()]
        assert labels == ["a5-7-1_C0", "a5-7-1_C1_0.1_10", "a5-7-1_C1_0.1_5"]
        assert all(sc.h == 1.5 for sc in cfg.scenarios())

    def test_bad_contamination(self):
        with pytest.raises(ConfigError) as e:
            RunConfig.resolve(cli={"mc_contamination": "0.1"})
        assert e.value.key == "MC_CONTAMINATION"
        assert e.value.error_code == SmoothingErrorCode.CONFIG_ERROR

    @pytest.mark.parametrize("folds", ["loo", "LOO", "10"])
    def test_folds(self, folds):
        assert RunConfig.resolve(cli={"cv_folds": folds}).cv_config().folds in ("loo", 10)

    def test_single_fold_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.resolve(cli={"cv_folds": "1"})
