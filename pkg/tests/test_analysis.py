import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmuc import analysis
from helmuc.analysis import (
    CSV_COLUMNS,
    ConvergenceReport,
    ErrorReport,
    LevelFailure,
    StudyConfig,
    error_norms,
    fit_rate,
    run_convergence_study,
    star_norm,
)
from helmuc.assembly import assemble_mass, assemble_stiffness, interpolate
from helmuc.mesh import box, build_uniform_mesh, classify_elements
from helmuc.problems import ProblemCase, gaussian_bump
from helmuc.solver import SolverError

UNIT = (0.0, 1.0, 0.0, 1.0)
WHOLE = box(*UNIT)


def sine_case(k=0.0, c=1.0):
    """``c sin(pi x) sin(pi y)`` with closed-form derivatives."""
    p = np.pi

    def u(x, y):
        return c * np.sin(p * x) * np.sin(p * y)

    def grad(x, y):
        return c * p * np.cos(p * x) * np.sin(p * y), c * p * np.sin(p * x) * np.cos(p * y)

    def hessian(x, y):
        s = -c * p * p * np.sin(p * x) * np.sin(p * y)
        return s, c * p * p * np.cos(p * x) * np.cos(p * y), s

    return ProblemCase("sine", UNIT, k, u, grad, hessian)


def zero_case():
    z = lambda x, y: 0.0 * x * y  # noqa: E731
    return ProblemCase("zero", UNIT, 3.0, z, lambda x, y: (z(x, y), z(x, y)), lambda x, y: (z(x, y),) * 3)


# ---------------------------------------------------------------- fit_rate


def test_fit_rate_examples():
    assert fit_rate([1, 0.5, 0.25], [1, 0.25, 0.0625]) == pytest.approx(2.0, abs=1e-14)
    assert fit_rate([0.1, 0.05], [3.0, 3.0]) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("h,e", [([1.0], [1.0]), ([1, 0.5], [1, 0]), ([1, -0.5], [1, 1]), ([1, 0.5], [1])])
def test_fit_rate_rejects(h, e):
    with pytest.raises(ValueError):
        fit_rate(h, e)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-3, 3), c=st.floats(1e-3, 1e3))
def test_fit_rate_recovers_power_and_ignores_constant(p, c):
    h = np.array([0.2, 0.1, 0.05, 0.025])
    assert fit_rate(h, c * h**p) == pytest.approx(p, abs=1e-9)


# ---------------------------------------------------------------- error norms


def test_affine_interpolant_has_zero_error():
    m = build_uniform_mesh(UNIT, 5, 5)

    def u(x, y):
        return 2 * x - y + 0.5

    case = ProblemCase("affine", UNIT, 0.0, u, lambda x, y: (2 + 0 * x, -1 + 0 * x), lambda x, y: (0 * x,) * 3)
    n = error_norms(m, WHOLE, interpolate(m, u), case)
    assert n.l2 < 1e-14 and n.h1 < 1e-13


def test_zero_exact_gives_nan_relative():
    m = build_uniform_mesh(UNIT, 4, 4)
    n = error_norms(m, WHOLE, np.ones(m.n_vertices), zero_case())
    assert np.isnan(n.rel_l2) and np.isnan(n.rel_h1)
    assert n.l2 == pytest.approx(1.0, rel=1e-14)


def test_empty_region_rejected():
    m = build_uniform_mesh(UNIT, 4, 4)
    with pytest.raises(ValueError):
        error_norms(m, box(0.1, 0.11, 0.1, 0.11), np.zeros(m.n_vertices), None)


def test_norms_match_matrix_forms():
    m = build_uniform_mesh(UNIT, 9, 9)
    rng = np.random.default_rng(0)
    u = rng.normal(size=m.n_vertices)
    n = error_norms(m, WHOLE, u, None)
    assert n.l2**2 == pytest.approx(u @ assemble_mass(m) @ u, rel=1e-12)
    assert n.h1**2 == pytest.approx(u @ (assemble_mass(m) + assemble_stiffness(m)) @ u, rel=1e-12)
    region = box(0, 1, 0, 0.5)
    n = error_norms(m, region, u, None)
    assert n.l2**2 == pytest.approx(u @ assemble_mass(m, classify_elements(m, region)) @ u, rel=1e-12)


def test_triangle_inequality():
    m = build_uniform_mesh(UNIT, 8, 8)
    rng = np.random.default_rng(1)
    case = gaussian_bump(10)
    a, b = rng.normal(size=(2, m.n_vertices))
    ea, eb = error_norms(m, WHOLE, a, case), error_norms(m, WHOLE, b, case)
    d = error_norms(m, WHOLE, a - b, None)
    assert ea.l2 <= eb.l2 + d.l2 + 1e-12
    assert ea.h1 <= eb.h1 + d.h1 + 1e-12


def test_interpolant_rates():
    case = sine_case()
    hs, l2, h1 = [], [], []
    for n in (8, 16, 32, 64):
        m = build_uniform_mesh(UNIT, n, n)
        e = error_norms(m, WHOLE, interpolate(m, case.u), case)
        hs.append(m.h)
        l2.append(e.l2)
        h1.append(e.h1)
    assert fit_rate(hs, l2) == pytest.approx(2.0, abs=0.1)
    assert fit_rate(hs, h1) == pytest.approx(1.0, abs=0.1)


# ---------------------------------------------------------------- star norm


def test_star_norm_closed_form():
    # |u|_H2^2 = 1/4 + pi^2/2 + pi^4 and |u|_L2 = 1/2 for sin(pi x) sin(pi y)
    expected = np.sqrt(0.25 + np.pi**2 / 2 + np.pi**4) + 4.0 * 0.5
    assert star_norm(sine_case(k=2.0)) == pytest.approx(expected, rel=1e-10)


def test_star_norm_zero_and_homogeneous():
    assert star_norm(zero_case()) == 0.0
    assert star_norm(sine_case(3.0, c=-2.5)) == pytest.approx(2.5 * star_norm(sine_case(3.0)), rel=1e-13)


def test_star_norm_grid_converged():
    g = gaussian_bump(10)
    a, b = star_norm(g, 512), star_norm(g, 1024)
    assert abs(a - b) <= 1e-4 * abs(b)


# ---------------------------------------------------------------- reports and studies


def _level(h, e):
    return ErrorReport(h, e, e, e, e / h, e, e)


def test_report_rejects_unsorted_levels():
    with pytest.raises(ValueError):
        ConvergenceReport([_level(0.1, 1.0), _level(0.2, 0.5)])


def test_report_csv_layout():
    r = ConvergenceReport([_level(0.2, 0.4), _level(0.1, 0.1)])
    lines = r.to_csv().splitlines()
    assert lines[0] == ", ".join(CSV_COLUMNS)
    assert len(lines) == 4 and lines[-1].startswith("# rates: rel_l2_B=2")
    assert r.rates["jump_over_h"] == pytest.approx(1.0, abs=1e-12)


def test_report_nan_rate_for_zero_column():
    r = ConvergenceReport([ErrorReport(0.2, 1, 1, 0, 0, 1, 1), ErrorReport(0.1, 0.5, 0.5, 0, 0, 1, 1)])
    assert np.isnan(r.rates["jump"])


SMALL = StudyConfig(levels=(4, 8, 12))


def test_study_deterministic_and_thread_independent(monkeypatch):
    a = run_convergence_study(SMALL).to_csv()
    assert a == run_convergence_study(SMALL).to_csv()
    monkeypatch.setenv("HELMUC_THREADS", "3")
    assert a == run_convergence_study(SMALL).to_csv()


def test_study_levels_decrease_in_h():
    r = run_convergence_study(SMALL)
    assert np.all(np.diff(r.column("h")) < 0)
    assert set(r.rates) == set(CSV_COLUMNS[1:])


def test_level_failure_names_level(monkeypatch):
    real = analysis.solve

    def flaky(system):
        if system.n_primal > 100:
            raise SolverError("singular")
        return real(system)

    monkeypatch.setattr(analysis, "solve", flaky)
    with pytest.raises(LevelFailure) as info:
        run_convergence_study(SMALL)
    assert info.value.n == 12


def test_report_dict_round_trip():
    r = run_convergence_study(StudyConfig(levels=(4, 8)))
    d = analysis.report_dict(r)
    assert len(d["levels"]) == 2 and d["rates"] == r.rates
