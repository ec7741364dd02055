import math
import os

import numpy as np
import pytest

from qspring.core.exception import QSpringConfigError, QSpringDomainError
from qspring.core import physics
from qspring.core import scenarios

CONFIG_DIR = os.path.dirname(scenarios.DEFAULT_CONFIG_PATH)

# light integrator settings shared by the swap tests
FAST = {'samples': 101, 'omega_over_G': 20.0, 'tol': 1e-6, 'max_halvings': 3}


@pytest.fixture(scope='module')
def ledger():
    return scenarios.run_example_ledger()


# ***********************************************************************
# settings
# ***********************************************************************


def test_default_config_sections():
    config = scenarios.default_config()
    assert set(config) == {'Integrator', 'Thresholds', 'Geometry', 'Transfer', 'Sweep',
                           'Adiabatic', 'Oracle'}
    assert config['Transfer']['squeeze_db'] == 9.0
    assert config['Oracle']['dims'] == (20, 20)
    assert config['Geometry']['membrane_window_m'] is None


def test_config_string_merges_over_defaults():
    config = scenarios.load_config_from_string('[Transfer]\nsqueeze_db=6.0\n')
    assert config['Transfer']['squeeze_db'] == 6.0
    assert config['Transfer']['nbar'] == 5.0


def test_thermal_bath_config_file():
    config = scenarios.load_config(os.path.join(CONFIG_DIR, 'thermal_bath.cfg'))
    assert config['Transfer']['assignment'] == 'thermal'
    assert config['Sweep']['gamma_steps'] == 11


@pytest.mark.parametrize('text, field', [
    ('[Plotting]\ncolour=1\n', 'Plotting'),
    ('[Transfer]\nsqueze_db=6.0\n', 'Transfer.squeze_db'),
    ('[Transfer]\nsqueeze_db=six\n', 'Transfer.squeeze_db'),
])
def test_config_errors_name_the_key(text, field):
    with pytest.raises(QSpringConfigError) as info:
        scenarios.load_config_from_string(text)
    assert info.value.field == field


def test_missing_config_file():
    with pytest.raises(FileNotFoundError):
        scenarios.load_config('/nonexistent/settings.cfg')


# ***********************************************************************
# worked-example ledger
# ***********************************************************************


def test_ledger_reproduces_printed_values(ledger):
    printed = ledger.printed
    assert printed['delta_over_kappa']['value'] == pytest.approx(18.0, rel=1e-12)
    assert printed['cooperativity']['value'] == pytest.approx(140.0, abs=1.0)
    assert printed['mass_ratio']['value'] == pytest.approx(6e-13, rel=0.1)
    assert 30.0 <= printed['absorption_heating']['value'] <= 60.0
    assert printed['P_c_uW']['value'] == pytest.approx(850.0)
    assert 1.0 <= printed['delta_T_K']['value'] <= 3.0
    assert ledger.report.regime == 'weak'


def test_ledger_reports_regime_gap(ledger):
    gap = ledger.gaps['regime']
    assert gap['value'] == 'weak'
    assert gap['printed'] == 'strong'
    assert gap['drive'] == 'split'
    assert 'G_over_gamma_m' in gap['failing']
    assert 'G_over_gamma_at' not in gap['failing']
    assert 'failing checks' in scenarios.summarize_ledger(ledger)


def test_ledger_reports_coupling_gap(ledger):
    gap = ledger.gaps['G_over_2pi_kHz']
    assert gap['printed'] == 45.0
    assert gap['ratio'] > 0
    assert gap['geometry_factors']['theta'] > 0.9


def test_ledger_thresholds_from_config():
    config = scenarios.load_config_from_string('[Thresholds]\nG_over_gamma_m=1e6\n')
    ledger = scenarios.run_example_ledger(config)
    assert ledger.report.regime == 'weak'
    assert ledger.config['Thresholds']['G_over_gamma_m'] == 1e6


def test_ledger_summary_and_dict(ledger):
    text = scenarios.summarize_ledger(ledger)
    assert 'printed values' in text
    data = ledger.to_dict()
    assert set(data) >= {'params', 'site', 'rates', 'report', 'printed', 'gaps'}
    assert 'params' not in data['rates']


# ***********************************************************************
# loss assignments
# ***********************************************************************


def test_symmetric_losses():
    losses = scenarios.swap_losses(0.2)
    assert losses['gamma_c_plus'] == losses['gamma_c_minus'] == losses['gamma_at'] == 0.2
    assert losses['thermal_rates'] == (0.2, 0.2)
    assert losses['phi'] == pytest.approx(math.pi / 4)


def test_thermal_losses():
    losses = scenarios.swap_losses(0.2, 'thermal', bath_nbar=4.0)
    down, up = losses['thermal_rates']
    assert up == pytest.approx(0.2)
    assert down == pytest.approx(0.25)


@pytest.mark.parametrize('assignment, kept', [
    ('cavity-only', 'gamma_c_plus'),
    ('atom-only', 'gamma_at'),
])
def test_single_channel_losses(assignment, kept):
    losses = scenarios.swap_losses(0.3, assignment)
    for name in ('gamma_c_plus', 'gamma_at'):
        assert losses[name] == (0.3 if name == kept else 0.0)
    assert losses['thermal_rates'] == (0.0, 0.0)


@pytest.mark.parametrize('gamma, assignment', [(-0.1, 'symmetric'), (0.1, 'preset'),
                                               (0.1, 'bogus')])
def test_swap_losses_validation(gamma, assignment):
    with pytest.raises(QSpringDomainError):
        scenarios.swap_losses(gamma, assignment)


def test_preset_losses(ledger):
    losses = scenarios.preset_losses(ledger.rates)
    assert 0.0 < losses['gamma_c_plus'] < losses['gamma_c_minus'] < 1.0
    assert losses['omega_over_G'] == pytest.approx(
        ledger.params.membrane.omega_m_rad_s / ledger.rates.G_rad_s)
    model = scenarios.transfer_model(0.0, assignment='preset', rates=ledger.rates)
    assert model.H_matrix[0, 0] == pytest.approx(losses['omega_over_G'])


# ***********************************************************************
# swap
# ***********************************************************************


def test_lossless_swap_transfers_squeezing():
    result = scenarios.transfer_experiment(gamma_over_G=0.0, **FAST)
    assert result.max_transferred_db == pytest.approx(9.0, abs=0.7)
    assert result.swap_fidelity_at_half_pi > 0.9
    assert result.rotation_optimized
    i = int(np.argmin(np.abs(result.times - math.pi / 2)))
    assert result.membrane_raw_db[i] <= result.membrane_squeezing_db[i] + 1e-9
    assert result.membrane_squeezing_db[0] == pytest.approx(-10.414, abs=1e-3)


def test_losses_reduce_transfer():
    clean = scenarios.transfer_experiment(gamma_over_G=0.0, **FAST)
    lossy = scenarios.transfer_experiment(gamma_over_G=0.3, **FAST)
    assert lossy.max_transferred_db < clean.max_transferred_db
    assert lossy.swap_fidelity_at_half_pi < clean.swap_fidelity_at_half_pi


def test_transfer_at_default_frequency():
    result = scenarios.transfer_experiment(0.1, 9.0, 5.0)
    assert result.config['omega_over_G'] == 50.0
    assert 0.0 < result.max_transferred_db < 9.0
    assert np.all(result.membrane_raw_db <= result.membrane_squeezing_db + 1e-9)


def test_transfer_requires_swap_time():
    with pytest.raises(QSpringDomainError) as info:
        scenarios.transfer_experiment(t_max=1.0, **FAST)
    assert info.value.field == 't_max'


def test_transfer_rows_and_summary():
    result = scenarios.transfer_experiment(gamma_over_G=0.1, **FAST)
    rows = result.to_rows()
    assert rows[0] == ['time', 'membrane_squeezing_db', 'membrane_raw_db',
                       'atom_squeezing_db']
    assert len(rows) == FAST['samples'] + 1
    assert 'max_transferred_db' in scenarios.summarize_transfer(result)
    assert result.to_dict()['config']['gamma_over_G'] == 0.1


def test_rotating_wave_reference():
    times = np.array([0.0, math.pi / 4, math.pi / 2])
    covs, db = scenarios.rwa_swap_reference(9.0, 5.0, times)
    assert db[0] == pytest.approx(-10.414, abs=1e-3)
    assert db[2] == pytest.approx(9.0)
    assert covs.shape == (3, 2, 2)


def test_swap_wigner_panels():
    result = scenarios.transfer_experiment(gamma_over_G=0.0, **FAST)
    grid = np.linspace(-3.0, 3.0, 13)
    panels = scenarios.swap_wigner_panels(result, grid)
    assert set(panels) == {'x', 'p', 'atom_t0', 'membrane_t0', 'atom_swap',
                           'membrane_swap'}
    assert panels['membrane_swap'].shape == (13, 13)
    # squeezed atom peaks higher than the thermal membrane
    assert panels['atom_t0'][6, 6] > panels['membrane_t0'][6, 6]


# ***********************************************************************
# sweep
# ***********************************************************************


SWEEP = {'samples': 51, 'omega_over_G': 20.0, 'tol': 1e-5, 'max_halvings': 2,
         'poll_frequency': 0.01}


def test_sweep_table(tmp_path):
    path = str(tmp_path / 'sweep.csv')
    table = scenarios.transfer_sweep(csv_path=path, poll_frequency=0.01)
    assert len(table.gammas()) == 26
    assert table.gammas()[-1] == pytest.approx(0.5)
    assert table.squeezings() == [3.0, 6.0, 9.0]
    for db in table.squeezings():
        column = np.asarray(table.column(db))
        assert np.all(np.diff(column) <= 1e-9)
        assert abs(column[0] - db) < 0.5
    with open(path) as file:
        lines = file.read().splitlines()
    assert lines[0].startswith('gamma_over_G,squeeze_db,max_transferred_db')
    assert len(lines) == 1 + 3 * 26


def test_sweep_matches_single_runs():
    table = scenarios.transfer_sweep([0.0, 0.2], init_squeeze_db=(6.0,), **SWEEP)
    kwargs = {key: SWEEP[key] for key in ('samples', 'omega_over_G', 'tol', 'max_halvings')}
    for gamma in (0.0, 0.2):
        result = scenarios.transfer_experiment(gamma, 6.0, **kwargs)
        row = table.rows[(gamma, 6.0)]
        assert row['max_transferred_db'] == pytest.approx(result.max_transferred_db, abs=1e-3)
        assert row['t_at_max'] == pytest.approx(result.t_at_max, abs=math.pi / 50)


def test_sweep_is_independent_of_workers():
    one = scenarios.transfer_sweep([0.0, 0.1], init_squeeze_db=(3.0,), workers=1, **SWEEP)
    two = scenarios.transfer_sweep([0.0, 0.1], init_squeeze_db=(3.0,), workers=2, **SWEEP)
    assert one.rows == two.rows


def test_sweep_rejects_negative_rates():
    with pytest.raises(QSpringDomainError):
        scenarios.transfer_sweep([-0.1], init_squeeze_db=(3.0,), **SWEEP)


def test_sweep_workers(monkeypatch):
    monkeypatch.setenv('QSPRING_THREADS', '2')
    assert scenarios.sweep_workers(10, 8) == 2
    assert scenarios.sweep_workers(1, 8) == 1
    monkeypatch.setenv('QSPRING_THREADS', 'many')
    with pytest.raises(QSpringConfigError):
        scenarios.sweep_workers(10, 8)


# ***********************************************************************
# adiabatic elimination
# ***********************************************************************


ADIABATIC = {'samples': 51, 'tol': 1e-5, 'max_halvings': 2}


def test_adiabatic_check_agrees_far_detuned():
    rows = scenarios.adiabatic_check([30.0], **ADIABATIC)
    row = rows[0]
    assert row.stable
    assert row.G == pytest.approx(physics.effective_coupling_G(1.0, 1.0, 30.0, 1.0, 1.5))
    assert np.isfinite(row.discrepancy)
    assert row.discrepancy < 0.25
    assert 'Delta/g=30' in scenarios.summarize_adiabatic(rows)


def test_adiabatic_check_decoupled_limit():
    row = scenarios.adiabatic_check([30.0], g=0.0, **ADIABATIC)[0]
    assert row.G == 0.0
    assert row.discrepancy < 1e-9


def test_adiabatic_check_defaults():
    rows = scenarios.adiabatic_check()
    assert [row.ratio for row in rows] == [30.0, 100.0, 300.0]
    assert all(row.stable for row in rows)
    assert rows[1].discrepancy < 0.03
    assert rows[0].discrepancy > rows[1].discrepancy > rows[2].discrepancy


@pytest.mark.parametrize('kwargs, field', [
    ({'ratios': [5.0]}, 'ratios'),
    ({'ratios': [30.0], 'kappa_over_delta': 0.0}, 'kappa_over_delta'),
])
def test_adiabatic_check_validation(kwargs, field):
    with pytest.raises(QSpringDomainError) as info:
        scenarios.adiabatic_check(**kwargs)
    assert info.value.field == field


# ***********************************************************************
# Fock oracle
# ***********************************************************************


def test_oracle_agrees_with_gaussian_engine():
    result = scenarios.oracle_experiment(gamma_over_G=0.05, squeeze_db=3.0, nbar=0.3,
                                         omega_over_G=5.0, dims=(16, 16),
                                         t_max=math.pi / 2, samples=11)
    assert result.max_cov_difference < 1e-3
    assert result.max_mean_difference < 1e-9
    data = result.to_dict()
    assert data['min_eigenvalue'] > -1e-8
    assert len(data['max_tail']) == 2
    assert len(result.to_rows()) == 12


def test_oracle_central_run():
    result = scenarios.oracle_experiment()
    assert result.config['dims'] == [20, 20]
    assert result.config['omega_over_G'] == 20.0
    assert result.max_mean_difference < 1e-3
    assert result.max_cov_difference < 1e-3
    assert result.fock.times[-1] == pytest.approx(math.pi)
