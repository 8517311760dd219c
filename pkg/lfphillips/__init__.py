"""lfphillips - inflation, unemployment and labour force linked on cumulative curves."""

__version__ = "0.1.0"
