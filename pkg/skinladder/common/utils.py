# coding: utf-8

import csv
import io
import json
import math
import os
from collections import OrderedDict

import numpy
from scipy import optimize, spatial, stats

from skinladder.common.errors import UsageError


def format_float(value):
    '''Full double precision text form (17 significant digits)'''
    return "%.17g" % value


def format_cell(value):
    if isinstance(value, (float, numpy.floating)):
        return format_float(float(value))
    if isinstance(value, (numpy.integer,)):
        return str(int(value))
    return str(value)


def ensure_dir(path):
    if not os.path.exists(path):
        os.makedirs(path)
    return path


class CsvSerializer(object):
    '''Write a data table as CSV

    The file has a header row, UTF-8 text, '.' as decimal separator and every
    float printed with 17 significant digits, so re-running a deterministic
    computation regenerates the file byte for byte.
    '''

    def __init__(self, data_file):
        self.data_file = data_file

    def serialize(self, data_items, column_names):
        with io.open(self.data_file, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(column_names)
            for item in data_items:
                assert len(item) == len(column_names)
                writer.writerow([format_cell(x) for x in item])
        return self.data_file


def write_csv(path, column_names, rows):
    return CsvSerializer(path).serialize(rows, column_names)


def read_csv(path):
    '''Read a CSV written by `write_csv` into (header, rows of strings)'''
    with io.open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def jsonable(value):
    '''Convert numpy scalars/arrays and non-finite floats for json.dump'''
    if isinstance(value, dict):
        return OrderedDict((k, jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [jsonable(x) for x in value]
    if isinstance(value, numpy.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (numpy.integer,)):
        return int(value)
    if isinstance(value, (numpy.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (numpy.bool_,)):
        return bool(value)
    return value


def write_json(path, data):
    with io.open(path, "w", encoding="utf-8") as f:
        json.dump(jsonable(data), f, indent=2)
        f.write("\n")
    return path


def linear_fit(x, y):
    '''Least-squares line through (x, y)

    Returns:
        OrderedDict: slope, intercept, r_squared and residuals. r_squared is
        None when y has no spread (a perfect plateau).
    '''
    x = numpy.asarray(x, dtype=float)
    y = numpy.asarray(y, dtype=float)
    if len(x) < 2 or numpy.ptp(x) == 0:
        raise UsageError("Degenerate abscissas for a linear fit: %s" %
                         list(x))
    res = stats.linregress(x, y)
    residuals = y - (res.slope * x + res.intercept)
    ss_tot = float(numpy.sum((y - y.mean())**2))
    if ss_tot == 0.0:
        r_squared = None
    else:
        r_squared = 1.0 - float(numpy.sum(residuals**2)) / ss_tot
    return OrderedDict([("slope", float(res.slope)),
                        ("intercept", float(res.intercept)),
                        ("slope_stderr", float(res.stderr)),
                        ("r_squared", r_squared),
                        ("residuals", residuals)])


def as_points(spectrum):
    spectrum = numpy.asarray(spectrum, dtype=complex).ravel()
    return numpy.column_stack([spectrum.real, spectrum.imag])


def hausdorff_distance(spec_a, spec_b):
    '''Symmetric Hausdorff distance of two spectra as planar point sets'''
    a, b = as_points(spec_a), as_points(spec_b)
    return max(spatial.distance.directed_hausdorff(a, b)[0],
               spatial.distance.directed_hausdorff(b, a)[0])


def conjugation_defect(spectrum):
    '''Largest distance from a conjugated eigenvalue to the spectrum'''
    tree = spatial.cKDTree(as_points(spectrum))
    dist, _ = tree.query(as_points(numpy.conj(spectrum)))
    return float(numpy.max(dist))


def pairwise_match(spec_a, spec_b):
    '''Largest eigenvalue distance under the optimal one-to-one pairing'''
    spec_a = numpy.asarray(spec_a, dtype=complex).ravel()
    spec_b = numpy.asarray(spec_b, dtype=complex).ravel()
    if spec_a.shape != spec_b.shape:
        return math.inf
    cost = numpy.abs(spec_a[:, None] - spec_b[None, :])
    rows, cols = optimize.linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
