# Copyright 2026 The FMSC Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python front end for the fmsc compressor."""

import json

import numpy as np

from ._fmsc import FmscError, nrmse, synthesize, tau_from_nrmse
from . import _fmsc

__all__ = [
    "FmscError",
    "compress",
    "decompress",
    "inspect",
    "nrmse",
    "param_count",
    "synthesize",
    "tau_from_nrmse",
    "train_desk",
]


def compress(field, ckpt, nrmse=1e-3, block=64):
    """Compress a [T, H, W] float array; returns the artifact bytes."""
    return _fmsc.compress(np.ascontiguousarray(field, dtype=np.float32), str(ckpt), nrmse, block)


def decompress(data, ckpt):
    return _fmsc.decompress(bytes(data), str(ckpt))


def inspect(data):
    return json.loads(_fmsc.inspect_json(bytes(data)))


def param_count(ckpt):
    return _fmsc.param_count(str(ckpt))


def train_desk(fields, out, iterations=200, lam=1e-4, seed=0):
    """Desk-scale foundation training; writes a checkpoint to `out`."""
    arrays = [np.ascontiguousarray(f, dtype=np.float32) for f in fields]
    return json.loads(_fmsc.train_desk_json(arrays, str(out), iterations, lam, seed))
