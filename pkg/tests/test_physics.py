from dataclasses import replace
import json
import math

import numpy as np
import pytest

from qspring.core.exception import QSpringConfigError, QSpringDomainError
from qspring.core import physics
from qspring.core.physics import TWO_PI


@pytest.fixture(scope='module')
def preset():
    return physics.example_preset()


@pytest.fixture(scope='module')
def preset_rates(preset):
    site = physics.choose_lattice_site(preset)
    k1, k2 = physics.cavity_wavenumbers(preset)
    x_m, _, _ = physics.choose_membrane_position(
        preset.membrane.reflectivity, k1, k2, physics.default_membrane_window(k1, k2))
    rates = physics.derive_rates(preset, site, x_m)
    return rates, physics.check_conditions(rates)


# ***********************************************************************
# parameters
# ***********************************************************************


def test_preset_echoes_printed_inputs(preset):
    kappa, coop = physics.kappa_and_cooperativity(preset)
    assert coop == pytest.approx(140.0, rel=1e-12)
    assert preset.cavity.detuning_rad_s / kappa == pytest.approx(18.0, rel=1e-12)
    assert kappa == pytest.approx(np.pi * physics.C_LIGHT / (2.0 * 2e5 * 50e-6))
    assert kappa == pytest.approx(4.70912e7, rel=1e-4)


def test_params_dict_uses_hz_conversion():
    data = physics.params_to_dict(physics.example_preset())
    omega = data['membrane'].pop('omega_m_rad_s')
    data['membrane']['omega_m_hz'] = omega / TWO_PI
    params = physics.params_from_dict(data)
    assert params.membrane.omega_m_rad_s == pytest.approx(omega, rel=1e-14)


def test_load_params_from_json(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps(physics.params_to_dict(physics.example_preset())))
    params = physics.load_params(str(path))
    assert params == physics.example_preset()


@pytest.mark.parametrize('section, key', [('membrane', 'colour'), ('laser', 'power')])
def test_unknown_fields_name_their_path(section, key):
    data = physics.params_to_dict(physics.example_preset())
    data.setdefault(section, {})[key] = 1.0
    with pytest.raises(QSpringConfigError) as info:
        physics.params_from_dict(data)
    assert section in str(info.value)


@pytest.mark.parametrize('override, field', [
    ('membrane.reflectivity=1.2', 'membrane.reflectivity'),
    ('cavity.finesse=-1', 'cavity.finesse'),
    ('atom.delta_rad_s=1e9', 'atom.delta_rad_s'),
])
def test_invalid_overrides_are_domain_errors(preset, override, field):
    with pytest.raises(QSpringDomainError) as info:
        physics.apply_overrides(preset, [override])
    assert info.value.field == field


def test_override_alpha_clears_power(preset):
    params = physics.apply_overrides(preset, ['drive.alpha=1000.0'])
    assert params.drive.circulating_power_W is None
    alpha, power = physics.drive_amplitude(params)
    assert alpha == 1000.0
    assert power > 0


def test_bad_override_syntax(preset):
    with pytest.raises(QSpringConfigError):
        physics.apply_overrides(preset, ['membrane.reflectivity'])
    with pytest.raises(QSpringConfigError):
        physics.apply_overrides(preset, ['mirror.reflectivity=0.5'])


# ***********************************************************************
# lattice and membrane geometry
# ***********************************************************************


@pytest.mark.parametrize('q', [1, 2, 3, 5])
def test_lattice_well_geometry(q):
    k1 = TWO_PI / 852e-9
    delta_k = q * np.pi / 50e-6
    site = physics.solve_lattice_site(2.0 * k1 - delta_k, delta_k)
    assert site.theta > 0.9
    assert site.xi < 1.3
    assert site.curvature > 0
    assert site.residual < 1e-6


def test_lattice_well_is_a_stationary_point():
    k1 = TWO_PI / 852e-9
    delta_k = 2 * np.pi / 50e-6
    k = 2.0 * k1 - delta_k
    site = physics.solve_lattice_site(k, delta_k)
    s, eps = k * site.x_at_m, delta_k / k
    assert math.tan(s) + eps * math.tan(eps * s) == pytest.approx(0.0, abs=1e-6)


def test_lattice_wells_are_ranked():
    k1 = TWO_PI / 852e-9
    delta_k = np.pi / 50e-6
    wells = physics.lattice_wells(2.0 * k1 - delta_k, delta_k)
    scores = [abs(1 - w.theta) + abs(1 - w.xi) for w in wells]
    assert scores == sorted(scores)
    assert [w.well_offset for w in wells] == list(range(len(wells)))


def test_small_beat_gives_nearly_ideal_well():
    k = TWO_PI / 852e-9
    site = physics.solve_lattice_site(k, 1e-3 * k)
    assert site.theta == pytest.approx(1.0, abs=1e-3)
    assert site.xi == pytest.approx(1.0, abs=1e-2)


@pytest.mark.parametrize('delta_k', [0.0, -1.0, 2e7])
def test_lattice_rejects_bad_beat(delta_k):
    with pytest.raises(QSpringDomainError):
        physics.solve_lattice_site(1e7, delta_k)


def test_membrane_geometry_bounds():
    xs = np.linspace(0.0, 1e-6, 257)
    f1, f2 = physics.membrane_geometry(0.45, 7.3e6, 7.0e6, xs)
    assert np.all(np.abs(f1) <= 2.0 * 0.45 / math.sqrt(1 - 0.45 ** 2) + 1e-12)
    assert np.all(np.abs(f2) <= 2.0)


def test_membrane_position_balances_both_fringes(preset):
    k1, k2 = physics.cavity_wavenumbers(preset)
    x_m, f1, f2 = physics.choose_membrane_position(
        0.45, k1, k2, physics.default_membrane_window(k1, k2))
    assert min(f1, f2) > 0.8
    assert 0 <= x_m <= physics.default_membrane_window(k1, k2)


def test_membrane_window_must_span_a_period():
    with pytest.raises(QSpringDomainError):
        physics.choose_membrane_position(0.45, 7.3e6, 7.0e6, 1e-9)


# ***********************************************************************
# couplings
# ***********************************************************************


def test_effective_coupling_far_detuned_limit():
    g, Delta = 1.0, 1e4
    G = physics.effective_coupling_G(g, g, Delta, 1.0, 0.05 * Delta)
    assert G == pytest.approx(4.0 * g * g / Delta, rel=1e-2)


def test_cavity_decoherence_symmetry():
    plus, minus, phi = physics.cavity_decoherence(1.0, 1.0, 100.0, 0.0, 5.0)
    assert plus == pytest.approx(minus)
    assert phi == pytest.approx(math.pi / 4)


def test_cavity_decoherence_falls_with_detuning():
    deltas = np.linspace(2.0, 50.0, 49)
    rates = np.array([physics.cavity_decoherence(1.0, 0.5, d, 1.0, 0.5)[:2] for d in deltas])
    assert np.all(np.diff(rates[:, 0]) < 0)
    assert np.all(np.diff(rates[:, 1]) < 0)
    assert np.all(rates[:, 0] < rates[:, 1])


def test_effective_coupling_requires_decay():
    with pytest.raises(QSpringDomainError):
        physics.effective_coupling_G(1.0, 1.0, 10.0, 1.0, 0.0)


def test_thermal_occupation():
    omega = TWO_PI * 1e6
    n_classical = physics.thermal_occupation(omega, 1.0)
    n_bose = physics.thermal_occupation(omega, 1.0, bose=True)
    assert n_classical == pytest.approx(physics.KB / (physics.HBAR * omega))
    assert n_bose == pytest.approx(n_classical - 0.5, rel=1e-3)
    assert physics.thermal_occupation(omega, 0.0) == 0.0


def test_thermal_link_scaling():
    value = physics.thermal_link_scaling(50e-9, 50e-9, 100e-6, 500e-6, 100e-6, 10e-6)
    assert value == pytest.approx(math.log(5.0) / math.log(5.0), rel=1e-12)
    with pytest.raises(QSpringDomainError):
        physics.thermal_link_scaling(50e-9, 50e-9, 10e-6, 500e-6, 100e-6, 10e-6)


def test_geometric_cooperativity_scales_with_finesse():
    c1 = physics.geometric_cooperativity(852e-9, 1e5, 10e-6)
    c2 = physics.geometric_cooperativity(852e-9, 2e5, 10e-6)
    assert c2 == pytest.approx(2.0 * c1)


# ***********************************************************************
# preset rates and ledger
# ***********************************************************************


def test_preset_rates(preset_rates):
    rates, report = preset_rates
    assert rates.mass_ratio == pytest.approx(5.5175e-13, rel=1e-4)
    assert rates.P_c_W == pytest.approx(850e-6)
    assert 1.0 <= rates.delta_T_K <= 3.0
    assert rates.G_rad_s > 0
    assert rates.gamma_c_plus < rates.gamma_c_minus
    assert rates.theta > 0.9
    assert rates.xi <= 1.5


def test_preset_ledger_misses_membrane_check(preset_rates):
    rates, report = preset_rates
    assert report.ratios['delta_over_kappa'] == pytest.approx(18.0, rel=1e-12)
    assert 30.0 <= report.ratios['absorption_heating'] <= 60.0
    # shared drive power leaves G below the thermal membrane rate threshold
    assert report.regime == 'weak'
    assert not report.checks['G_over_gamma_m'].passed
    assert report.ratios['G_over_gamma_m'] == pytest.approx(3.726, rel=0.01)
    assert report.checks['G_over_gamma_at'].passed
    assert report.ratios['G_over_gamma_at'] == pytest.approx(7.04, rel=0.01)


def test_drive_power_is_split_between_modes(preset):
    assert preset.drive.split_power
    alpha, power = physics.drive_amplitude(preset)
    omega1 = physics.drive_frequency(preset)
    expected = power * preset.cavity.length_m / (2.0 * physics.HBAR * omega1 * physics.C_LIGHT)
    assert alpha ** 2 == pytest.approx(expected, rel=1e-12)
    full = physics.apply_overrides(preset, ['drive.split_power=False'])
    alpha_full, power_full = physics.drive_amplitude(full)
    assert power_full == power
    assert alpha_full == pytest.approx(math.sqrt(2.0) * alpha, rel=1e-12)


@pytest.mark.parametrize('scale', [0.5, 2.0])
def test_coupling_is_invariant_under_atomic_detuning(preset_rates, scale):
    rates, _ = preset_rates
    site = physics.choose_lattice_site(rates.params)

    def _resonant(delta):
        params = replace(rates.params, atom=replace(rates.params.atom, delta_rad_s=delta))
        alpha = physics.resonant_alpha(params, site)
        params = replace(params, drive=replace(params.drive, alpha=alpha,
                                               circulating_power_W=None))
        return physics.derive_rates(params, site, rates.x_m_m)

    base = _resonant(rates.params.atom.delta_rad_s)
    scaled = _resonant(scale ** 2 * rates.params.atom.delta_rad_s)
    # U0 falls as 1/delta, alpha rises as sqrt(delta), g_atc g_mc is unchanged
    assert scaled.omega_at_rad_s == pytest.approx(rates.params.membrane.omega_m_rad_s,
                                                  rel=1e-9)
    assert scaled.alpha == pytest.approx(scale * base.alpha, rel=1e-9)
    assert scaled.G_rad_s == pytest.approx(base.G_rad_s, rel=1e-9)


def test_ledger_thresholds_flip_the_regime(preset_rates):
    rates, _ = preset_rates
    report = physics.check_conditions(rates, {'G_over_gamma_at': 1e6})
    assert report.regime == 'weak'
    assert not report.checks['G_over_gamma_at'].passed
    with pytest.raises(QSpringConfigError):
        physics.check_conditions(rates, {'nonsense': 1.0})


def test_reflectivity_override_recomputes_geometry(preset):
    params = physics.apply_overrides(preset, ['membrane.reflectivity=0.9'])
    k1, k2 = physics.cavity_wavenumbers(params)
    x_m, f1, f2 = physics.choose_membrane_position(
        0.9, k1, k2, physics.default_membrane_window(k1, k2))
    _, f1_ref, _ = physics.choose_membrane_position(
        0.45, k1, k2, physics.default_membrane_window(k1, k2))
    assert f1 > f1_ref


def test_summarize_rates_lists_every_check(preset_rates):
    rates, report = preset_rates
    text = physics.summarize_rates(rates, report)
    for name in physics.DEFAULT_THRESHOLDS:
        assert name in text
