"""
Desk-scale reproductions of the benchmark experiments

Long-running checks of convergence, coverage, autocorrelation ordering and
relative efficiency. Deselected by default; run with `pytest -m slow`.
"""

import asyncio

import numpy as np
import pytest

from bench.experiments import create_registry
from core.adaptation import default_config
from core.diagnostics import coverage_experiment, exp_sum_function, mc_estimate_experiment, oracle_expectation
from core.samplers import Kernel, SamplerConfig
from core.targets import benchmark_banana_target, benchmark_t_target
from schemas.experiment_config import ExperimentConfig

pytestmark = pytest.mark.slow

LV_TRUTH = [0.09, 0.004, 0.08, 0.004, 0.25, 0.25, 30.0, 10.0]
LV_C0_SD = [0.005, 0.0005, 0.005, 0.0005, 0.03, 0.03, 2.0, 0.5]


def tsam_config(target, seed):
    return SamplerConfig(
        adaptation=default_config(target.dim, support=target.support),
        n_iters=1,
        burn_in_fraction=0.5,
        seed=seed,
        kernel=Kernel.TSAM,
    )


def run_experiment(payload, tmp_path):
    config = ExperimentConfig.model_validate({**payload, "output_dir": str(tmp_path), "write_traces": False})
    result = asyncio.run(create_registry().execute_experiment(config))
    assert result["success"], result.get("error")
    return result


class TestConvergence:
    """Replicate experiments on the truncated t and twisted Gaussian targets"""

    def test_t_target_estimate_and_shrinking_spread(self):
        """Test the replicate mean at n=10000 is within 3 SDs of the oracle and the SD shrinks with n"""
        target = benchmark_t_target()
        f = exp_sum_function()
        n_list = [500, 1000, 2000, 5000, 10000]

        summaries = mc_estimate_experiment(target, tsam_config(target, 100), f, m=20, n_list=n_list)
        oracle = oracle_expectation(target, f, 10 ** 6, np.random.default_rng(0))

        final = summaries[-1]
        assert abs(final.mean - oracle) < 3 * final.sd
        assert final.sd < summaries[0].sd

    def test_adaptive_kernels_have_smaller_spread(self, tmp_path):
        """Test AM and TSAM replicate SDs at n=5000 are below the fixed-covariance MH SD"""
        result = run_experiment({
            "experiment": "mc-estimate",
            "target": {"kind": "shifted_t", "preset": "benchmark"},
            "samplers": [{"kernel": k} for k in ("TSAM", "AM", "TSMH", "MH")],
            "seed": 150,
            "workers": 4,
            "mc_estimate": {"m": 20, "n_list": [5000], "oracle_draws": 0},
        }, tmp_path)

        assert result["kernels"] == ["TSAM", "AM", "TSMH", "MH"]
        sd = {row["kernel"]: row["sd"] for row in result["summary"]}
        assert sd["AM"] < sd["MH"]
        assert sd["TSAM"] < sd["MH"]

    def test_banana_coverage(self):
        """Test the mean coverage of the 68.3% region is within 0.02"""
        target = benchmark_banana_target()
        summaries = coverage_experiment(target, tsam_config(target, 200), p=0.683, m=10, n_list=[20000])
        assert summaries[0].mean == pytest.approx(0.683, abs=0.02)


class TestAutocorrelationOrdering:
    """Adaptive kernels mix faster than fixed-covariance MH"""

    def test_lag_20_along_principal_direction(self, tmp_path):
        """Test AM and TSAM lag-20 ACF at least 0.1 below MH over 5 seeds"""
        result = run_experiment({
            "experiment": "acf-compare",
            "target": {"kind": "shifted_t", "preset": "benchmark"},
            "samplers": [
                {"kernel": "AM", "n_iters": 20000},
                {"kernel": "TSAM", "n_iters": 20000},
                {"kernel": "MH", "n_iters": 20000},
            ],
            "seed": 300,
            "workers": 3,
            "acf": {"max_lag": 20, "replicates": 5},
        }, tmp_path)

        acf = {kernel: values["principal"] for kernel, values in result["acf_at_lag"].items()}
        assert result["lag"] == 20
        assert acf["MH"] - acf["AM"] >= 0.1
        assert acf["MH"] - acf["TSAM"] >= 0.1


class TestRelativeEfficiency:
    """Two-stage adaptive sampling against single-stage adaptive sampling"""

    def test_predator_prey(self, tmp_path):
        """Test REDPM of TSAM over AM on the log posterior exceeds 1.5"""
        sampler = {
            "n_iters": 20000,
            "initial_state": LV_TRUTH,
            "adaptation": {"C0_sd": LV_C0_SD, "scale_epsilon": False, "epsilon": 1e-10},
        }
        result = run_experiment({
            "experiment": "edpm-compare",
            "target": {"kind": "lotka_volterra", "synthetic": {"seed": 1}},
            "samplers": [{"kernel": "TSAM", **sampler}, {"kernel": "AM", **sampler}],
            "seed": 400,
            "edpm": {"thinnings": [1]},
        }, tmp_path)

        assert result["kernels"] == ["TSAM", "AM"]
        assert result["redpm_log_pi"] > 1.5

    def test_imbalanced_logistic(self, tmp_path):
        """Test REDPM of TSAM over AM on the log posterior exceeds 1 for every thinning"""
        sampler = {
            "n_iters": 20000,
            "start": "surrogate_mode",
            "adaptation": {"C0_sd": [0.05] * 11, "scale_epsilon": False, "epsilon": 1e-8},
        }
        result = run_experiment({
            "experiment": "edpm-compare",
            "target": {
                "kind": "logistic",
                "synthetic": {"n": 41188, "zero_fraction": 0.887, "seed": 0},
                "n0": 10000,
                "subsample_seed": 1,
            },
            "samplers": [{"kernel": "TSAM", **sampler}, {"kernel": "AM", **sampler}],
            "seed": 500,
            "edpm": {"thinnings": [1, 10, 20]},
        }, tmp_path)

        log_pi = [row for row in result["summary"] if row["projection"] == "log_pi"]
        assert [row["thinning"] for row in log_pi] == [1, 10, 20]
        assert all(row["redpm"] > 1.0 for row in log_pi)
