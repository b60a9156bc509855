"""Cut-and-paste of Fredholm modules and the relative index, in finite dimensions."""

__version__ = "0.1.0"
