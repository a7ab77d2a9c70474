import csv
from math import pi, sqrt

import numpy as np
import pytest

from starflow.flow import FlowConfig, run
from starflow.geometry import (
    compute_geometry,
    ellipse,
    ellipsoid_of_revolution,
    embed,
    perturbed_sphere,
    quermass_minkowski,
    quermass_sigma,
    sphere,
)
from starflow.verify import (
    LagrangianCurve,
    check_af_chain,
    check_first_variation,
    check_lemma_integral,
    check_monotone_series,
    check_prop1_axisym,
    check_prop1_pointwise,
    curve_from_radial,
    radial_from_curve,
    write_report_csv,
)
from _oracles import ellipse_perimeter


class TestLagrangianCurve:
    def test_rejects_clockwise(self):
        pts = embed(sphere(1.0, 1, 64))[::-1]
        with pytest.raises(ValueError, match="orient"):
            LagrangianCurve(pts)

    def test_roundtrip_off_grid(self):
        # rotate so curve nodes fall between the radial grid angles
        g = ellipse(2.0, 1.0, 512)
        th = g.param + 0.4
        pts = np.stack([g.r * np.cos(th), g.r * np.sin(th)], axis=1)
        back = radial_from_curve(LagrangianCurve(pts), 512)
        ref = ellipse(2.0, 1.0, 512)
        # the ellipse radial function is rotation-covariant; compare quermass
        a = quermass_sigma(compute_geometry(back), 1)
        b = quermass_sigma(compute_geometry(ref), 1)
        assert abs(a - b) / b < 1e-8
        v_a = quermass_minkowski(compute_geometry(back), 0)
        v_b = quermass_minkowski(compute_geometry(ref), 0)
        assert abs(v_a - v_b) / v_b < 1e-8

    def test_not_starshaped_rejected(self):
        t = 2 * pi * np.arange(64) / 64
        pts = np.stack([np.cos(t) + 1.5, np.sin(t)], axis=1)  # origin outside
        with pytest.raises(ValueError, match="starshaped"):
            radial_from_curve(LagrangianCurve(pts), 64)


class TestProp1Pointwise:
    def test_circle_residuals_tiny(self):
        curve = curve_from_radial(sphere(1.0, 1, 128))
        reports = check_prop1_pointwise(curve, 1, 7e-5, tol=1e-8)
        assert len(reports) == 5
        for rep in reports:
            assert rep.rel_residual < 1e-8, rep

    def test_circle_metric_rate_closed_form(self):
        # dg/dt = 2 F h = 2 R(t)^2 on the unit circle, window center t = dt
        from math import exp

        curve = curve_from_radial(sphere(1.0, 1, 128))
        rep = next(r for r in check_prop1_pointwise(curve, 1, 7e-5) if r.name == "prop1/g11")
        assert rep.rhs == pytest.approx(2.0 * exp(2 * 7e-5), rel=1e-9)
        # centered-difference floor in double precision sits near 1e-9
        assert rep.rel_residual < 1e-8

    def test_ellipse_richardson_ratios(self):
        coarse = check_prop1_pointwise(curve_from_radial(ellipse(2, 1, 128)), 1, 4e-4)
        fine = check_prop1_pointwise(curve_from_radial(ellipse(2, 1, 256)), 1, 2e-4)
        for rc, rf in zip(coarse, fine):
            ratio = rc.rel_residual / rf.rel_residual
            assert 3.5 <= ratio <= 4.5, (rc.name, ratio)

    def test_rejects_nonconvex(self):
        curve = curve_from_radial(perturbed_sphere(1.0, 0.3, mode=3, dim=1, num=128))
        with pytest.raises(ValueError, match="convex"):
            check_prop1_pointwise(curve, 1, 1e-5)

    def test_rejects_k_above_curve_dim(self):
        curve = curve_from_radial(sphere(1.0, 1, 64))
        with pytest.raises(ValueError):
            check_prop1_pointwise(curve, 2, 1e-5)


class TestProp1Axisym:
    def test_sphere(self):
        for rep in check_prop1_axisym(sphere(1.0, 2, 256), 1, 1e-5, tol=1e-3):
            assert rep.passed, rep

    @pytest.mark.parametrize("k", [1, 2])
    def test_spheroid(self, k):
        for rep in check_prop1_axisym(ellipsoid_of_revolution(1.2, 1.0, 256), k, 1e-5, tol=5e-3):
            assert rep.passed, rep


class TestLemmaIntegral:
    def test_curve_total_curvature_conserved(self):
        config = FlowConfig(n=1, k=1, mode="raw", t_max=0.05, dt_init=1e-3)
        reports = check_lemma_integral(config, ellipse(2.0, 1.0, 256), 1)
        rate, topo = reports
        assert rate.passed and rate.rel_residual < 1e-3
        assert topo.rhs == pytest.approx(2 * pi, rel=1e-15)
        assert topo.passed and topo.abs_residual < 1e-7  # pinned at 2 pi

    def test_curve_perimeter_growth(self):
        config = FlowConfig(n=1, k=1, mode="raw", t_max=0.05, dt_init=1e-3)
        (rate,) = check_lemma_integral(config, ellipse(2.0, 1.0, 256), 0)
        assert rate.passed and rate.rel_residual < 1e-3

    def test_surface_gauss_bonnet_conserved(self):
        config = FlowConfig(n=2, k=1, mode="raw", t_max=0.05, dt_init=1e-3)
        reports = check_lemma_integral(config, ellipsoid_of_revolution(1.5, 1.0, 256), 2)
        rate, topo = reports
        assert rate.passed
        assert topo.rhs == pytest.approx(4 * pi, rel=1e-15)
        assert topo.abs_residual < 1e-6

    def test_requires_raw_mode(self):
        config = FlowConfig(n=2, k=1, mode="normalized", t_max=0.05)
        with pytest.raises(ValueError, match="raw"):
            check_lemma_integral(config, sphere(1.0, 2, 64), 1)

    def test_residual_drops_under_refinement(self):
        residuals = []
        for num in (128, 256):
            config = FlowConfig(n=1, k=1, mode="raw", t_max=0.05, dt_init=1e-3)
            (rate,) = check_lemma_integral(config, ellipse(2.0, 1.0, num), 0)
            residuals.append(rate.rel_residual)
        assert residuals[0] / residuals[1] > 4.0  # at least second order


class TestFirstVariation:
    def test_circle_length(self):
        rep = check_first_variation(sphere(1.0, 1, 256), lambda t: np.ones_like(t), 0)
        assert rep.lhs == pytest.approx(2 * pi, rel=1e-6)
        assert rep.passed

    def test_sphere_mean_curvature_integral(self):
        rep = check_first_variation(sphere(1.0, 2, 256), lambda t: np.ones_like(t), 1)
        assert rep.lhs == pytest.approx(8 * pi, rel=1e-4)
        assert rep.rhs == pytest.approx(8 * pi, rel=1e-4)
        assert rep.passed

    def test_ellipse_mode_two(self):
        rep = check_first_variation(ellipse(2.0, 1.0, 512), lambda t: np.cos(2 * t), 0)
        assert rep.rel_residual < 1e-3

    def test_rejects_destructive_probe(self):
        # s rho pushes part of the curve through the origin
        with pytest.raises(ValueError):
            check_first_variation(
                sphere(1.0, 1, 64), lambda t: np.cos(t), 0, s=1.2
            )


class TestAfChain:
    def test_sphere_equality(self):
        for n, num in ((1, 256), (2, 512)):
            geo = compute_geometry(sphere(1.0, n, num))
            for rep in check_af_chain(geo, n):
                assert abs(rep.lhs - rep.rhs) < 1e-10

    def test_ellipse_isoperimetric_numbers(self):
        geo = compute_geometry(ellipse(2.0, 1.0, 512))
        (rep,) = check_af_chain(geo, 1)
        # classical isoperimetric inequality, via the independent
        # perimeter oracle: L^2 >= 4 pi A
        length = ellipse_perimeter(2.0, 1.0)
        assert length == pytest.approx(9.688448, abs=1e-6)
        area = quermass_minkowski(geo, 0) / 2.0
        assert length**2 >= 4 * pi * area
        assert rep.passed and rep.lhs <= rep.rhs

    def test_random_samples_pass(self):
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 20:
            eps = rng.uniform(0.02, 0.3)
            mode = int(rng.integers(2, 5))
            g = perturbed_sphere(1.0, eps, mode=mode, dim=2, num=256)
            geo = compute_geometry(g)
            from starflow.geometry import kconvex_report

            if kconvex_report(geo, 1).status != "strict":
                continue
            for rep in check_af_chain(geo, 1, slack=1e-6):
                assert rep.passed, rep
            checked += 1

    def test_precondition_not_counterexample(self):
        geo = compute_geometry(perturbed_sphere(1.0, 0.45, mode=2, dim=1, num=128))
        with pytest.raises(ValueError, match="precondition"):
            check_af_chain(geo, 1)


class TestMonotoneSeries:
    def test_sphere_constant_columns(self):
        config = FlowConfig(n=2, k=1, mode="normalized", t_max=0.2,
                            dt_init=1e-3, sample_every=5)
        record = run(config, sphere(1.0, 2, 64))
        mono, cons, term = check_monotone_series(record, ball_tol=1e-6)
        assert mono.passed and cons.passed and term.passed
        iso = record.column("I1")
        assert np.max(np.abs(iso - iso[0])) < 1e-12

    def test_ellipse_increases(self):
        config = FlowConfig(n=1, k=1, mode="rescaled_raw", t_max=0.5,
                            dt_init=1e-3, sample_every=20)
        record = run(config, ellipse(2.0, 1.0, 128))
        mono, cons, _term = check_monotone_series(record, ball_tol=np.inf)
        assert mono.passed and cons.passed
        iso = record.column("I0")
        assert iso[-1] > iso[0] + 1e-3  # genuinely increasing, not flat

    def test_requires_conserving_mode(self):
        config = FlowConfig(n=1, k=1, mode="raw", t_max=0.05, sample_every=10)
        record = run(config, ellipse(2.0, 1.0, 64))
        with pytest.raises(ValueError, match="normalized or rescaled_raw"):
            check_monotone_series(record)


class TestReportCsv:
    def test_write_and_parse(self, tmp_path):
        curve = curve_from_radial(sphere(1.0, 1, 128))
        reports = check_prop1_pointwise(curve, 1, 7e-5, tol=1e-8)
        path = tmp_path / "report.csv"
        write_report_csv(reports, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["check", "lhs", "rhs", "abs_residual", "rel_residual", "tolerance", "pass"]
        assert len(rows) == 1 + len(reports)
        for row in rows[1:]:
            assert len(row) == 7
            float(row[1]), float(row[2]), float(row[3])
            assert row[6] in ("True", "False")
