import csv
import json
import math

import numpy as np
import pytest

from fpukdv.core import ConfigurationError, ErrorRecord, InvalidInputError
from fpukdv.harness import (
    ERROR_CSV_HEADER,
    ExperimentSpec,
    error_records_rows,
    fit_scaling_exponent,
    orbital_distance,
    pairwise_exponent,
    run_error_scan,
    run_metastability,
    run_norm_growth,
    run_residual_scan,
    time_window,
    write_csv,
    write_summary_json,
)


class TestTimeWindow:
    def test_theorem1_hand_value(self):
        # t0 = r K^-1 eps^-3 |log eps| = 0.25 * 1000 * log(10) = 575.646...
        t0, tau0 = time_window(0.1, r=0.25, K=1.0, p=2, theorem=1)
        assert t0 == pytest.approx(0.25 * 1000.0 * math.log(10.0), rel=1e-12)
        assert tau0 == pytest.approx(t0 * 1e-3, rel=1e-12)

    def test_theorem2_hand_value(self):
        # t0 = (2pK)^-1 eps^-3 log(r |log eps|), p=4, K=1, r=0.45, eps=0.01
        t0, _ = time_window(0.01, r=0.45, K=1.0, p=4, theorem=2)
        expected = 1e6 * math.log(0.45 * math.log(100.0)) / 8.0
        assert t0 == pytest.approx(expected, rel=1e-12)

    def test_theorem2_needs_large_log(self):
        # r |log eps| <= 1 has an empty window
        with pytest.raises(ConfigurationError):
            time_window(0.1, r=0.25, K=1.0, p=2, theorem=2)

    def test_invalid_args(self):
        with pytest.raises(InvalidInputError):
            time_window(1.5, r=0.25, K=1.0, p=2, theorem=1)
        with pytest.raises(InvalidInputError):
            time_window(0.1, r=0.25, K=1.0, p=2, theorem=3)


class TestFits:
    def test_exact_power_law_recovered(self):
        eps = [0.2, 0.1, 0.05, 0.025]
        pts = [(e, 3.7 * e**4.5) for e in eps]
        fit = fit_scaling_exponent(pts)
        assert fit.slope == pytest.approx(4.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.7), abs=1e-12)
        assert fit.residual_rms < 1e-13

    def test_needs_three_points(self):
        with pytest.raises(InvalidInputError):
            fit_scaling_exponent([(0.1, 1.0), (0.05, 0.5)])

    def test_rejects_nonpositive_values(self):
        with pytest.raises(InvalidInputError):
            fit_scaling_exponent([(0.1, 1.0), (0.05, 0.0), (0.025, 0.1)])

    def test_pairwise_exponent(self):
        assert pairwise_exponent((0.1, 1.0), (0.05, 2.0 ** -1.5)) == pytest.approx(1.5)


class TestOrbitalDistance:
    def test_zero_for_identical(self):
        rng = np.random.default_rng(3)
        u = rng.standard_normal(128)
        assert orbital_distance(u, u) == pytest.approx(0.0, abs=1e-10)

    def test_invariant_under_integer_shift(self):
        rng = np.random.default_rng(4)
        u = rng.standard_normal(128)
        assert orbital_distance(np.roll(u, 17), u) == pytest.approx(0.0, abs=1e-9)

    def test_subsite_shift_of_smooth_wave(self):
        # smooth profile displaced by a fractional site is still orbit-close
        n = np.arange(256)
        u = np.exp(-((n - 128.0) ** 2) / 50.0)
        u_shift = np.exp(-((n - 128.4) ** 2) / 50.0)
        raw = math.sqrt(np.sum((u - u_shift) ** 2))
        # quadratic refinement removes most (not all) of the sub-site offset
        assert orbital_distance(u_shift, u) < 0.2 * raw

    def test_detects_genuine_deformation(self):
        n = np.arange(256)
        u = np.exp(-((n - 128.0) ** 2) / 50.0)
        v = 1.5 * u
        assert orbital_distance(v, u) == pytest.approx(
            0.5 * math.sqrt(np.sum(u**2)), rel=1e-6)


class TestExperimentSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(kind="fourier_dance")

    def test_epsilons_must_decrease(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(kind="residual_scan", epsilons=(0.05, 0.1))

    def test_r_range(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(kind="residual_scan", r=0.6)


class TestRunners:
    def test_residual_scan_slopes(self):
        spec = ExperimentSpec(kind="residual_scan", p=2, epsilons=(0.2, 0.1, 0.05))
        out = run_residual_scan(spec)
        assert out["fits"]["res1"].slope == pytest.approx(4.5, abs=0.3)
        assert out["fits"]["res2"].slope == pytest.approx(4.5, abs=0.3)
        assert out["fits"]["truncation"].slope == pytest.approx(5.0, abs=0.3)

    def test_error_scan_serial_parallel_identical(self):
        spec = ExperimentSpec(kind="error_scan", p=2, epsilons=(0.2, 0.1),
                              tau0=0.05, n_samples=4)
        a = run_error_scan(spec, jobs=1)
        b = run_error_scan(spec, jobs=2)
        for ca, cb in zip(a["cells"], b["cells"]):
            assert ca["epsilon"] == cb["epsilon"]
            assert ca["sup_error"] == cb["sup_error"]
            ra = [r.err_u for r in ca["records"]]
            rb = [r.err_u for r in cb["records"]]
            assert ra == rb

    def test_error_scan_no_coercivity_violations(self):
        spec = ExperimentSpec(kind="error_scan", p=2, epsilons=(0.1,),
                              tau0=0.1, n_samples=5)
        out = run_error_scan(spec)
        cell = out["cells"][0]
        assert cell["coercivity_violations"] == 0
        assert not cell["flags"]["blow_up"]
        # error stays far below order one on this short window
        assert cell["sup_error"] < 1.0

    def test_metastability_seeded_perturbation_stays_bounded(self):
        spec = ExperimentSpec(kind="metastability", p=2, epsilons=(0.1,),
                              r=0.05, n_samples=10,
                              perturbation_mode="random", seed=42)
        out = run_metastability(spec)
        cell = out["cells"][0]
        assert not cell["flags"]["blow_up"]
        assert not cell["flags"]["growth"]
        assert cell["sup_over_delta"] < 50.0

    def test_norm_growth_p4_reports_exponent(self):
        spec = ExperimentSpec(kind="kdv_norm_growth", p=4, epsilons=(0.1,),
                              initial_mode="gaussian", amplitude=0.3,
                              s=2, L=32.0, M=512, dtau_kdv=5e-4,
                              tau_end=2.0, n_samples=20)
        out = run_norm_growth(spec)
        assert "growth_exponent" in out
        assert out["growth_exponent"] <= 1.0
        assert not out["resolution_flagged"]


class TestPersistence:
    def test_csv_roundtrip_and_format(self, tmp_path):
        rec = ErrorRecord(t=1.0, err_u=0.1, err_du=0.2, energy_quantity=0.3,
                          res1_norm=0.4, res2_norm=0.5, H_lattice=0.6,
                          coercivity_lhs=0.0, coercivity_ok=True)
        path = tmp_path / "errors.csv"
        write_csv(str(path), ERROR_CSV_HEADER, error_records_rows([rec]))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ERROR_CSV_HEADER
        assert rows[1][0] == "1"
        assert rows[1][-1] == "1"  # booleans as 0/1

    def test_csv_full_precision(self, tmp_path):
        value = 0.1 + 0.2  # not exactly representable as short decimal
        path = tmp_path / "x.csv"
        write_csv(str(path), ["v"], [[value]])
        with open(path) as fh:
            text = list(csv.reader(fh))[1][0]
        assert float(text) == value

    def test_csv_deterministic_bytes(self, tmp_path):
        spec = ExperimentSpec(kind="error_scan", p=2, epsilons=(0.1,),
                              tau0=0.02, n_samples=2)
        payloads = []
        for name in ("a.csv", "b.csv"):
            out = run_error_scan(spec)
            path = tmp_path / name
            write_csv(str(path), ERROR_CSV_HEADER,
                      error_records_rows(out["cells"][0]["records"]))
            payloads.append(path.read_bytes())
        assert payloads[0] == payloads[1]

    def test_summary_json(self, tmp_path):
        spec = ExperimentSpec(kind="residual_scan")
        out = run_residual_scan(spec)
        path = tmp_path / "summary.json"
        write_summary_json(str(path), spec, list(out["fits"].values()),
                           out["flags"], wall_time_s=0.1)
        payload = json.loads(path.read_text())
        assert payload["spec"]["kind"] == "residual_scan"
        assert len(payload["fits"]) == 3
        assert payload["wall_time_s"] == 0.1
