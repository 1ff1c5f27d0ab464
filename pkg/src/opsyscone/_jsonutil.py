"""JSON encoding helpers.

Complex matrices are stored as row-major lists of [re, im] pairs so reports
stay plain JSON.  `canonical_dumps` pins key order, which is what makes
report verdict fields byte-reproducible for a fixed config and seed.
"""

import json

import numpy as np


def complex_matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in a.reshape(-1)]


def complex_matrix_from_json(flat, shape):
    data = np.array([complex(re, im) for re, im in flat], dtype=complex)
    return data.reshape(shape)


def real_vector_to_json(v):
    return [float(x) for x in np.asarray(v).reshape(-1)]


def canonical_dumps(obj, indent=None):
    return json.dumps(obj, sort_keys=True, indent=indent, allow_nan=False)
