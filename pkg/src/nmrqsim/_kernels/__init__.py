"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``NMRQSIM_DISABLE_NUMBA`` is unset (or set to ``0``/``false``).
Both implementations share signatures and in-place semantics, so callers
never branch on the backend.
"""
import importlib
import os

from . import numpy_impl

_FLAG = os.environ.get("NMRQSIM_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

numba_impl = None
if not _DISABLED:
    try:
        numba_impl = importlib.import_module(".numba_impl", __name__)
    except ImportError:  # numba missing or broken
        numba_impl = None

impl = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if impl is numba_impl and numba_impl is not None else "numpy"

ONE_QUBIT = numpy_impl.ONE_QUBIT
CNOT = numpy_impl.CNOT
CPHASE = numpy_impl.CPHASE

apply_1q = impl.apply_1q
apply_cnot = impl.apply_cnot
apply_cphase = impl.apply_cphase
run_gates = impl.run_gates
run_noisy = impl.run_noisy
jacobi_eigh = impl.jacobi_eigh
lu_logdet = impl.lu_logdet
dft = impl.dft


def available_backends():
    """Return a dict of backend name -> implementation module."""
    out = {"numpy": numpy_impl}
    if numba_impl is not None:
        out["numba"] = numba_impl
    return out
