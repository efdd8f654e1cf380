"""Planning and simulation toolkit for memoryless repeater chains built on
redundant quantum parity codes."""

__version__ = "0.1.0"
