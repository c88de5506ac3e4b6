"""
Run reports: a directory of plain data files that external plotting tools
can read. Everything except timing.csv is reproducible byte for byte from
the echoed configuration and seed.
"""
import csv
import os

import numpy as np
import yaml

from hallcal.calibration.engine import CalibrationResult
from hallcal.hall.layout import HallLayout

from .formats import write_flow_rates

TRACE_FIELDS = ('iteration', 'validation_mae', 'best_mae', 'mean_l2', 'mean_gradient', 'train_l1',
                'solver_calls', 'dataset_size', 'improved')


def _number(value):
    value = float(value)
    return repr(value) if np.isfinite(value) else ''


def _rows(path: str, header, rows):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def summary(result: CalibrationResult) -> dict:
    return {
        'method': result.method,
        'best_mae': float(result.best_mae),
        'iterations': result.iterations,
        'solver_calls': result.solver_calls,
        'stopped_early': result.stopped_early,
    }


def write_report(out_dir: str, layout: HallLayout, result: CalibrationResult, conf: dict,
                 hidden_flow_rates=None, aborted: str = None):
    """
    Writes report.yaml (configuration echo and summary), flow_rates.csv,
    sensors.csv (measured against initial and calibrated predictions),
    traces.csv and timing.csv.
    """
    os.makedirs(out_dir, exist_ok=True)
    document = {'summary': summary(result), 'config': conf}

    if aborted is not None:
        document['summary']['aborted'] = aborted

    with open(os.path.join(out_dir, 'report.yaml'), 'w') as fp:
        yaml.safe_dump(document, fp, sort_keys=False, default_flow_style=None)

    columns = {'calibrated': result.flow_rates}

    if hidden_flow_rates is not None:
        columns['hidden'] = hidden_flow_rates

    write_flow_rates(os.path.join(out_dir, 'flow_rates.csv'), layout, columns)

    measured = result.measured.values
    initial = result.initial_prediction.values if result.initial_prediction is not None else np.full(layout.n, np.nan)
    calibrated = (result.calibrated_prediction.values if result.calibrated_prediction is not None
                  else np.full(layout.n, np.nan))

    _rows(os.path.join(out_dir, 'sensors.csv'),
          ['sensor_id', 'aisle', 'measured', 'initial', 'calibrated'],
          [[s.id, s.aisle.value, _number(measured[k]), _number(initial[k]), _number(calibrated[k])]
           for k, s in enumerate(layout.sensors)])

    _rows(os.path.join(out_dir, 'traces.csv'), TRACE_FIELDS, [
        [t.iteration, _number(t.validation_mae), _number(t.best_mae), _number(t.mean_l2),
         _number(t.mean_gradient), _number(t.train_l1), t.solver_calls, t.dataset_size, int(t.improved)]
        for t in result.traces
    ])

    _rows(os.path.join(out_dir, 'timing.csv'), ['iteration', 'wall_time'],
          [[t.iteration, '{:.6f}'.format(t.wall_time)] for t in result.traces])


def read_traces(path: str) -> list:
    with open(path, 'r', newline='') as fp:
        return list(csv.DictReader(fp))


def write_study(path: str, table):
    """One row per training fraction, one test-MAE column per surrogate."""
    names = list(table[0].errors) if table else []

    _rows(path, ['fraction', 'train_samples'] + names, [
        [repr(float(cell.fraction)), cell.train_samples] + [_number(cell.errors[name]) for name in names]
        for cell in table
    ])
