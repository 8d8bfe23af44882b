"""Select the kernel backend at import time.

The compiled ``_ckernels`` extension is used when it imports; setting
``LOCREG_BACKEND=python`` forces the numpy fallback.
"""

import os

from . import _pykernels

NAME = "python"
kernels = _pykernels

if os.environ.get("LOCREG_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        kernels = _ckernels
        NAME = "cython"

EPANECHNIKOV = _pykernels.EPANECHNIKOV
GAUSSIAN = _pykernels.GAUSSIAN
