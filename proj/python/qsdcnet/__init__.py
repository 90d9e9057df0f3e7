"""Python interface to the QSDC network simulator core."""

import json as _json

try:
    from qsdcnet._qsdcnet import (  # type: ignore[import-not-found]
        bell_state,
        builtin_basis_set,
        detection_probability,
        hadamard_matrix,
        pauli_unitary,
        run_report_json,
        sweep_csv,
        theoretical_eve_error_rate,
        verify,
    )
except ImportError:  # in-tree builds put the module on PYTHONPATH directly
    from _qsdcnet import (  # type: ignore[import-not-found]
        bell_state,
        builtin_basis_set,
        detection_probability,
        hadamard_matrix,
        pauli_unitary,
        run_report_json,
        sweep_csv,
        theoretical_eve_error_rate,
        verify,
    )


def run(config, parallel=1):
    """Run sessions from a config dict; returns the report as a dict."""
    return _json.loads(run_report_json(_json.dumps(config), parallel))


def sweep(config, sweep_spec=None, parallel=1):
    """Grid sweep; returns the CSV table as a string."""
    return sweep_csv(_json.dumps(config), _json.dumps(sweep_spec or {}), parallel)


__all__ = [
    "bell_state",
    "builtin_basis_set",
    "detection_probability",
    "hadamard_matrix",
    "pauli_unitary",
    "run",
    "run_report_json",
    "sweep",
    "sweep_csv",
    "theoretical_eve_error_rate",
    "verify",
]
