"""Noise thresholds for two-qubit gates and pairing-list circuit simulation."""

import json

from ._qctol import (
    SchemaError,
    ShotError,
    __version__,
    choi_of_unitary,
    clifford_threshold,
    cnot_depolarizing_threshold,
    compare,
    ebits,
    noisy_cnot_choi,
    observation0,
    split_threshold,
)
from ._qctol import simulate as _simulate
from ._qctol import run_dense as _run_dense


def _as_text(circuit):
    return circuit if isinstance(circuit, str) else json.dumps(circuit)


def simulate(circuit, shots, seed=0, threads=0):
    """Counts for a circuit given as a dict or JSON text."""
    return _simulate(_as_text(circuit), shots, seed, threads)


def run_dense(circuit):
    return _run_dense(_as_text(circuit))


__all__ = [
    "SchemaError",
    "ShotError",
    "choi_of_unitary",
    "clifford_threshold",
    "cnot_depolarizing_threshold",
    "compare",
    "ebits",
    "noisy_cnot_choi",
    "observation0",
    "run_dense",
    "simulate",
    "split_threshold",
]
