"""werprobe: WER prediction from text and raw signal, with probing analysis."""

__version__ = "0.1.0"
