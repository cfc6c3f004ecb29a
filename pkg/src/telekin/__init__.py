"""telekin: dual-arm dexterous teleoperation retargeting and task benchmark.

Converts human pose streams (vision, VR, MoCap glove, exoskeleton formats)
into robot joint commands via calibration, differential IK, hand
retargeting and Kalman smoothing, then executes and scores manipulation
tasks in a deterministic kinematic environment.
"""

from ._core import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
