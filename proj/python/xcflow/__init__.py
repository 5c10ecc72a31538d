"""Python interface to the cross curvature flow laboratory."""

try:
    from ._xcflow import *  # noqa: F401,F403  (installed package layout)
    from ._xcflow import __version__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree builds put _xcflow on sys.path
    from _xcflow import *  # noqa: F401,F403
    from _xcflow import __version__  # noqa: F401
