"""
Tests for presets, config files and logging setup.
"""

import json
import logging

import pytest

from models.run_config import build_run_config
from utils.config import Config, get_preset, load_config_file, load_presets, preset_names
from utils.logger import JSONFormatter, log_with_extra, setup_logger

EXPECTED_PRESETS = {'fig1', 'fig2', 'appendix-d', 'fig3-g1', 'fig3-g2', 'fig4-g1', 'fig4-g2'}


def test_presets_load():
    assert set(preset_names()) == EXPECTED_PRESETS
    assert set(load_presets()) == EXPECTED_PRESETS


def test_unknown_preset():
    with pytest.raises(KeyError, match="fig9"):
        get_preset('fig9')


def test_get_preset_returns_a_copy():
    preset = get_preset('fig3-g1')
    preset['task']['lambdas'].append(1000.0)
    preset['model']['pathloss']['alpha'] = 3
    assert get_preset('fig3-g1')['task']['lambdas'][-1] == 100.0
    assert get_preset('fig3-g1')['model']['pathloss']['alpha'] == 4


@pytest.mark.parametrize("name", sorted(EXPECTED_PRESETS))
def test_every_preset_builds_a_network(name):
    run = build_run_config(get_preset(name))
    network = run.model.to_network()
    assert network.pathloss.alpha > 2.0
    assert run.task.lambdas


def test_preset_parameters():
    outage = build_run_config(get_preset('fig3-g2')).task
    assert (outage.snr_db, outage.d, outage.pg, outage.gamma) == (20.0, 1.0, 100.0, 0.1)
    assert outage.direct_fading == {'kind': 'nakagami', 'm': 5}
    assert len(outage.lambdas) == 10

    sumcap = build_run_config(get_preset('fig4-g1')).task
    assert sumcap.snr_db == 0.0

    sparse = build_run_config(get_preset('fig2'))
    assert sparse.model.pathloss == {'kind': 'g2', 'alpha': 3}
    assert sparse.task.lambdas == [0.1]


def test_load_config_file(tmp_path):
    yaml_file = tmp_path / 'run.yaml'
    yaml_file.write_text("seed: 3\ntask:\n  lambdas: [1, 2]\n")
    assert load_config_file(yaml_file) == {'seed': 3, 'task': {'lambdas': [1, 2]}}

    json_file = tmp_path / 'run.json'
    json_file.write_text(json.dumps({'output': {'format': 'json'}}))
    assert load_config_file(json_file) == {'output': {'format': 'json'}}

    empty = tmp_path / 'empty.yaml'
    empty.write_text('')
    assert load_config_file(empty) == {}

    with pytest.raises(FileNotFoundError):
        load_config_file(tmp_path / 'nope.yaml')


def test_default_config_is_valid():
    assert Config.validate() == []
    assert Config.THREADS >= 1


def test_json_formatter_includes_extra_fields():
    logger = setup_logger('pppkit.test', level='DEBUG')
    records = []

    class Capture(logging.Handler):
        def emit(self, record):
            records.append(record)

    handler = Capture()
    logger.addHandler(handler)
    try:
        log_with_extra(logger, logging.INFO, "Sweep point", lam=5.0, lower=0.1)
    finally:
        logger.removeHandler(handler)

    payload = json.loads(JSONFormatter().format(records[0]))
    assert payload['message'] == "Sweep point"
    assert payload['level'] == 'INFO'
    assert payload['extra'] == {'lam': 5.0, 'lower': 0.1}
