"""Read-channel simulation toolkit.

Lorentzian channel synthesis, MMSE PR4 equalization, linear-prediction noise
whitening, a rank-list trellis detector with periodic EDC-gated decisions,
RS(255,245) framing, and block-multinomial post-ECC failure-rate estimation.

The detector's window kernel has a compiled (Cython) implementation with a
pure-Python fallback selected at import; see ``tapesim.detector.get_kernel``.
"""

from .detector import HAVE_COMPILED_KERNEL, DetectorConfig, ListDetector, run_detector

__all__ = ["HAVE_COMPILED_KERNEL", "DetectorConfig", "ListDetector", "run_detector"]
__version__ = "0.1.0"
