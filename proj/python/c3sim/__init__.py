"""Performance model for concurrent GPU computation and communication."""

import os

try:
    from ._c3sim import *  # noqa: F401,F403  (installed wheel layout)
    from . import _c3sim as _impl
except ImportError:  # in-tree build: the extension sits on PYTHONPATH
    from _c3sim import *  # noqa: F401,F403
    import _c3sim as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")] + ["data_path"]


def data_path(name=""):
    """Path to a bundled data file (machine, dataset, tables, params).

    Resolves the packaged copy when installed, or $C3SIM_DATA_DIR for
    in-tree runs.
    """
    env = os.environ.get("C3SIM_DATA_DIR")
    base = env if env else os.path.join(os.path.dirname(__file__), "data")
    return os.path.join(base, name) if name else base
