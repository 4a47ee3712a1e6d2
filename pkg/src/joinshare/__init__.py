"""Property-graph extraction with shared-join optimization."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("joinshare")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.0.0"
