"""Kernel selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` takes over.  Set ``FACSIM_BACKEND=python``
to force the fallback.
"""

import os

from facsim import _pykernels

_impl = _pykernels
NAME = "python"
if os.environ.get("FACSIM_BACKEND", "").lower() != "python":
    try:
        from facsim import _ckernels as _impl  # type: ignore[no-redef]

        NAME = "cython"
    except ImportError:
        pass

MODE_NONE = _pykernels.MODE_NONE
MODE_SA0 = _pykernels.MODE_SA0
MODE_SA1 = _pykernels.MODE_SA1
MODE_FLIP = _pykernels.MODE_FLIP
ADD_EXACT = _pykernels.ADD_EXACT
ADD_OR_BITS = _pykernels.ADD_OR_BITS
ADD_CONSTANT_ONE = _pykernels.ADD_CONSTANT_ONE

run_gates = _impl.run_gates
apply_mode = _impl.apply_mode
fft_stage = _impl.fft_stage


def use(name: str) -> None:
    """Switch backend at runtime (``"cython"`` or ``"python"``); used by tests and benchmarks."""
    global run_gates, apply_mode, fft_stage, NAME
    if name == "python":
        impl = _pykernels
    elif name == "cython":
        from facsim import _ckernels as impl
    else:
        raise ValueError(f"unknown backend {name!r}")
    run_gates, apply_mode, fft_stage, NAME = impl.run_gates, impl.apply_mode, impl.fft_stage, name


def available() -> list[str]:
    names = ["python"]
    try:
        from facsim import _ckernels  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return names
