"""
Tests for the CSV/JSON writers.
"""

import json
import math

import numpy as np

from models.results import SWEEP_COLUMNS, CapacityBounds, create_sweep_row
from utils.output import format_lambda, iter_lines, read_csv, write_json, write_table


def test_format_lambda():
    assert format_lambda(5.0) == '5'
    assert format_lambda(0.1) == '0.1'
    assert format_lambda(12.9155) == '12.9155'


def test_csv_keeps_full_precision(tmp_out):
    rows = [create_sweep_row(2.0, CapacityBounds(1 / 3, 0.5)), create_sweep_row(4.0, CapacityBounds(0.25, 0.3), 0.27, 0.01)]
    path = write_table(tmp_out, 'sweep', rows, 'csv', SWEEP_COLUMNS)

    assert path.name == 'sweep.csv'
    restored = read_csv(path)
    assert list(restored[0]) == SWEEP_COLUMNS
    assert float(restored[0]['lower']) == 1 / 3
    assert math.isnan(float(restored[0]['simulated']))
    assert float(restored[1]['simulated']) == 0.27


def test_json_is_plain(tmp_out):
    path = write_json(tmp_out / 'summary.json', {
        'values': np.array([1.0, np.nan]),
        'count': np.int64(3),
        'upper': math.inf,
    })
    payload = json.loads(path.read_text())
    assert payload == {'count': 3, 'upper': 'inf', 'values': [1.0, None]}


def test_json_table(tmp_out):
    rows = [{'x': 0.0, 'lower': 0.4, 'upper': 0.6}]
    path = write_table(tmp_out, 'curve', rows, 'json', ['x', 'upper'])
    assert json.loads(path.read_text()) == [{'x': 0.0, 'upper': 0.6}]


def test_iter_lines():
    lines = list(iter_lines([{'a': 1, 'b': 0.5}], ['a', 'b']))
    assert len(lines) == 2
    assert lines[0].split() == ['a', 'b']
    assert lines[1].split() == ['1', '0.5']
