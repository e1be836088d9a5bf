"""Time-domain Dyson solvers: closed forms, mutual agreement, round trips."""

import numpy as np
import pytest

from conftest import make_scalar_toy
from ddrf.dyson import (
    TimeGrid,
    VolterraConfig,
    chi0_series,
    coupling_matrix,
    dyson_residual,
    dyson_solve_march,
    dyson_solve_picard,
    fourier_transform_series,
    growth_envelope,
    inverse_map,
    reduce_to_transition_space,
    write_series,
)
from ddrf.errors import StepTooLargeError, TailNotDampedError
from ddrf.grid import OrbitalOccupation, build_grid
from ddrf.kernels import KernelMatrix, ZeroKernel, assemble_kernel_matrix
from ddrf.response import build_transitions, chi0_freq, chi0_time
from ddrf.suite import bundled_model


def scalar_closed_form(omega1, coupling, times):
    omega_t = np.sqrt(omega1**2 + 2 * omega1 * coupling)
    return -2.0 * omega1 / omega_t * np.sin(omega_t * times)


class TestReduce:
    def test_zero_kernel_gives_zero_coupling(self, harmonic_table):
        F = assemble_kernel_matrix(harmonic_table.grid, ZeroKernel())
        tg = TimeGrid(0.05, 10)
        G, D = reduce_to_transition_space(harmonic_table, F, tg)
        assert np.array_equal(G, np.zeros((3, 3)))

    def test_single_pair_quadratic_form(self):
        table, F, beta, coupling = make_scalar_toy()
        G = coupling_matrix(table, F)
        assert G.shape == (1, 1)
        assert G[0, 0] == pytest.approx(coupling, rel=1e-14)
        assert G[0, 0] >= 0

    def test_reconstruction_matches_chi0_time(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        tg = TimeGrid(0.05, 40)
        G, D = reduce_to_transition_space(harmonic_table, F, tg)
        phi = harmonic_table.phi
        for m in (0, 7, 40):
            lifted = phi @ D[m] @ phi.T * harmonic_table.dx
            direct = chi0_time(harmonic_table, tg.times[m])
            assert np.max(np.abs(lifted - direct)) <= 1e-12


class TestMarch:
    def test_zero_kernel_fixed_point(self, harmonic_table):
        F = assemble_kernel_matrix(harmonic_table.grid, ZeroKernel())
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 200))
        chi = dyson_solve_march(chi0, F)
        assert np.array_equal(chi.data, chi0.data)

    def test_scalar_toy_closed_form(self):
        table, F, beta, coupling = make_scalar_toy()
        tg = TimeGrid(1e-3, 4000)
        chi = dyson_solve_march(chi0_series(table, tg), F)
        closed = scalar_closed_form(1.0, coupling, tg.times)
        assert np.max(np.abs(chi.data[:, 0, 0] - closed)) <= 5e-7

    def test_dt_refinement_order_two(self):
        table, F, beta, coupling = make_scalar_toy()
        errors = []
        dts = (2e-3, 1e-3, 5e-4)
        for dt in dts:
            tg = TimeGrid(dt, int(round(4.0 / dt)))
            chi = dyson_solve_march(chi0_series(table, tg), F)
            closed = scalar_closed_form(1.0, coupling, tg.times)
            errors.append(np.max(np.abs(chi.data[:, 0, 0] - closed)))
        slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.3)

    def test_full_and_reduced_paths_agree(self):
        grid = build_grid(-7.0, 7.0, 31)
        from ddrf.grid import Harmonic, assemble_hamiltonian, diagonalize

        eig = diagonalize(assemble_hamiltonian(grid, Harmonic(1.0)))
        table = build_transitions(eig, OrbitalOccupation(1, 2))
        F = KernelMatrix(0.3 * np.eye(31), grid)
        tg = TimeGrid(0.02, 150)
        reduced = dyson_solve_march(chi0_series(table, tg), F)
        full = dyson_solve_march(chi0_series(table, tg, "full"), F)
        full_picard = dyson_solve_picard(chi0_series(table, tg, "full"), F)
        worst = max(
            np.max(np.abs(reduced.at(m) - full.data[m])) for m in range(151)
        )
        assert worst <= 1e-10
        assert np.max(np.abs(full_picard.data - full.data)) <= 1e-9

    def test_causality_strict_lower_triangular(self):
        # Perturbing the reference series at step m0 must not change the
        # solution before m0.
        table, F, beta, coupling = make_scalar_toy()
        tg = TimeGrid(0.01, 200)
        chi0 = chi0_series(table, tg)
        base = dyson_solve_march(chi0, F)
        bumped = chi0.data.copy()
        m0 = 120
        bumped[m0] += 0.37
        from dataclasses import replace

        chi0_bumped = replace(chi0, data=bumped)
        perturbed = dyson_solve_march(chi0_bumped, F)
        assert np.array_equal(perturbed.data[:m0], base.data[:m0])
        assert not np.array_equal(perturbed.data[m0:], base.data[m0:])


class TestPicard:
    def test_zero_kernel_one_sweep(self, harmonic_table):
        F = assemble_kernel_matrix(harmonic_table.grid, ZeroKernel())
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 100))
        chi = dyson_solve_picard(chi0, F)
        assert np.array_equal(chi.data, chi0.data)

    def test_scalar_toy_closed_form(self):
        table, F, beta, coupling = make_scalar_toy()
        tg = TimeGrid(1e-3, 4000)
        chi = dyson_solve_picard(chi0_series(table, tg), F)
        closed = scalar_closed_form(1.0, coupling, tg.times)
        assert np.max(np.abs(chi.data[:, 0, 0] - closed)) <= 5e-7

    def test_march_picard_mutual_oracle(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        tg = TimeGrid(0.02, 400)
        chi0 = chi0_series(harmonic_table, tg)
        a = dyson_solve_march(chi0, F)
        b = dyson_solve_picard(chi0, F)
        assert np.max(np.abs(a.data - b.data)) <= 1e-9

    def test_explicit_window_honored(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        tg = TimeGrid(0.02, 120)
        chi0 = chi0_series(harmonic_table, tg)
        a = dyson_solve_march(chi0, F)
        b = dyson_solve_picard(
            chi0, F, config=VolterraConfig(method="picard", window_steps=7)
        )
        assert np.max(np.abs(a.data - b.data)) <= 1e-9


class TestResidual:
    def test_solver_output_satisfies_equation(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 300))
        chi = dyson_solve_march(chi0, F)
        assert dyson_residual(chi0, chi, F) <= 1e-10

    def test_unsolved_series_has_defect(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 300))
        assert dyson_residual(chi0, chi0, F) > 1e-6

    def test_closed_form_residual_scales_with_dt_squared(self):
        table, F, beta, coupling = make_scalar_toy()
        residuals = []
        dts = (4e-3, 2e-3, 1e-3)
        for dt in dts:
            tg = TimeGrid(dt, int(round(3.0 / dt)))
            chi0 = chi0_series(table, tg)
            closed = scalar_closed_form(1.0, coupling, tg.times)
            from dataclasses import replace

            chi_closed = replace(chi0, data=closed[:, None, None])
            residuals.append(dyson_residual(chi0, chi_closed, F))
        slope = np.polyfit(np.log(dts), np.log(residuals), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.4)


class TestInverseMap:
    def test_round_trip(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 400))
        chi = dyson_solve_march(chi0, F)
        back = inverse_map(chi, F)
        assert np.max(np.abs(back.data - chi0.data)) <= 1e-8

    def test_zero_kernel_is_identity(self, harmonic_table):
        F = assemble_kernel_matrix(harmonic_table.grid, ZeroKernel())
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 100))
        back = inverse_map(chi0, F)
        assert np.array_equal(back.data, chi0.data)

    def test_scalar_toy_recovers_reference(self):
        table, F, beta, coupling = make_scalar_toy()
        tg = TimeGrid(1e-3, 3000)
        chi0 = chi0_series(table, tg)
        chi = dyson_solve_march(chi0, F)
        back = inverse_map(chi, F)
        reference = -2.0 * np.sin(tg.times)
        assert np.max(np.abs(back.data[:, 0, 0] - reference)) <= 1e-12


class TestFourierTransform:
    def test_chi0_series_matches_closed_form(self, harmonic_table):
        z = complex(1.0, 2.0)
        tg = TimeGrid(5e-3, int(round(23.0 / 2.0 / 5e-3)) + 1)
        chi0 = chi0_series(harmonic_table, tg)
        ft = fourier_transform_series(chi0, z)
        closed = chi0_freq(harmonic_table, z)
        assert np.max(np.abs(ft - closed)) <= 1e-6

    def test_zero_series_transforms_to_zero(self, harmonic_table):
        tg = TimeGrid(0.01, 2400)
        chi0 = chi0_series(harmonic_table, tg)
        from dataclasses import replace

        zero = replace(chi0, data=np.zeros_like(chi0.data))
        ft = fourier_transform_series(zero, complex(0.5, 1.0))
        assert np.array_equal(ft, np.zeros_like(ft))

    def test_undamped_tail_rejected(self, harmonic_table):
        chi0 = chi0_series(harmonic_table, TimeGrid(0.01, 100))
        with pytest.raises(TailNotDampedError):
            fourier_transform_series(chi0, complex(1.0, 0.5))


class TestSeriesPlumbing:
    def test_resolution_rule_enforced(self, harmonic_table):
        with pytest.raises(StepTooLargeError):
            chi0_series(harmonic_table, TimeGrid(0.2, 10))

    def test_growth_envelope_finite_slope(self, harmonic_table, harmonic_kernel):
        F, _ = harmonic_kernel
        chi0 = chi0_series(harmonic_table, TimeGrid(0.02, 500))
        chi = dyson_solve_march(chi0, F)
        amplitude, rate = growth_envelope(chi)
        assert np.isfinite(rate)
        # PSD kernel: poles stay real, so the envelope is essentially flat
        # and the fitted exponential rate is tiny.
        assert abs(rate) < 0.1
        norms = np.array([np.max(np.abs(chi.data[m])) for m in range(501)])
        early = np.max(norms[: len(norms) // 4])
        assert np.max(norms) <= 1.5 * early

    def test_series_export_round_trip(self, tmp_path, harmonic_table):
        import csv
        import json

        chi0 = chi0_series(harmonic_table, TimeGrid(0.05, 3))
        base = str(tmp_path / "series")
        csv_path, json_path = write_series(chi0, base)
        sidecar = json.loads(open(json_path).read())
        assert sidecar == {
            "dt": 0.05,
            "n_steps": 3,
            "representation": "reduced",
            "dimension": 3,
        }
        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4 * 3 * 3
        probe = next(r for r in rows if r["step"] == "2" and r["row"] == "1" and r["col"] == "1")
        assert float(probe["value"]) == chi0.data[2, 1, 1]

    def test_suite_march_picard_and_round_trip(self):
        # Uniqueness and bijection across a couple of bundled models.
        for idx in (0, 4):
            model = bundled_model(idx)
            dt = 0.18 / model.table.omega_max
            tg = TimeGrid(dt, int(round(6.0 / dt)))
            chi0 = chi0_series(model.table, tg)
            a = dyson_solve_march(chi0, model.F)
            b = dyson_solve_picard(chi0, model.F)
            assert np.max(np.abs(a.data - b.data)) <= 1e-9
            back = inverse_map(a, model.F)
            assert np.max(np.abs(back.data - chi0.data)) <= 1e-8


class TestGuardRails:
    def _general_series(self, scale, dt=0.01, steps=40):
        # A full-representation series with a nonzero value at t = 0 makes
        # every step implicit; scaling the self term toward 1/(dt/2) drives
        # the implicit factor singular.
        grid = build_grid(0.0, 1.0, 4)
        F = KernelMatrix(np.eye(4), grid)
        tg = TimeGrid(dt, steps)
        data = np.zeros((steps + 1, 4, 4))
        data[:] = np.eye(4) * scale
        from ddrf.dyson import OperatorSeries

        return OperatorSeries(tg, data, "full"), F, tg

    def test_ill_conditioned_step_detected(self):
        from ddrf.errors import IllConditionedStepError

        chi0, F, tg = self._general_series(scale=2.0 / 0.01)  # dt/2 * K0 = I
        with pytest.raises(IllConditionedStepError):
            dyson_solve_march(chi0, F)

    def test_implicit_step_solved_when_regular(self):
        chi0, F, tg = self._general_series(scale=3.0)
        chi = dyson_solve_march(chi0, F)
        assert dyson_residual(chi0, chi, F) <= 1e-10

    def test_no_contraction_raises(self):
        from ddrf.errors import NoContractionError

        chi0, F, tg = self._general_series(scale=250.0)  # dt/2 * |K0 G| > 1
        with pytest.raises(NoContractionError):
            dyson_solve_picard(chi0, F)

    def test_inverse_map_general_series_round_trip(self):
        chi0, F, tg = self._general_series(scale=3.0)
        chi = dyson_solve_march(chi0, F)
        back = inverse_map(chi, F)
        assert np.max(np.abs(back.data - chi0.data)) <= 1e-9


class TestGrowingSeries:
    def test_constant_reference_grows_and_guards_transform(self):
        # A constant-in-time reference series is a valid Volterra input but
        # its solution grows exponentially at the coupling rate; the
        # transform must refuse frequencies below the fitted growth rate.
        from ddrf.dyson import OperatorSeries, growth_envelope
        from ddrf.errors import TailNotDampedError

        grid = build_grid(0.0, 1.0, 3)
        c = 0.8
        F = KernelMatrix(np.eye(3), grid)
        tg = TimeGrid(0.01, 3000)
        data = np.broadcast_to(c * np.eye(3), (3001, 3, 3)).copy()
        chi0 = OperatorSeries(tg, data, "full")
        chi = dyson_solve_march(chi0, F)
        _, rate = growth_envelope(chi)
        assert rate == pytest.approx(c, abs=0.05)
        with pytest.raises(TailNotDampedError):
            fourier_transform_series(chi, complex(0.5, rate * 0.8))
        out = fourier_transform_series(chi, complex(0.5, rate + 1.0))
        assert np.all(np.isfinite(out))


class TestPicardWindowShrink:
    def test_oversized_window_shrinks_until_convergent(self):
        # Forcing the window to the whole horizon makes the fixed-point map
        # non-contractive; the solver must halve its way down and still
        # reach the marching solution.
        table, F, beta, coupling = make_scalar_toy(g=3.0)
        tg = TimeGrid(0.01, 400)
        chi0 = chi0_series(table, tg)
        march = dyson_solve_march(chi0, F)
        picard = dyson_solve_picard(
            chi0, F, config=VolterraConfig(method="picard", window_steps=400)
        )
        assert np.max(np.abs(march.data - picard.data)) <= 1e-9
