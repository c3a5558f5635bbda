"""Smooth-lattice Ricci flow for axisymmetric 2-surfaces of S^2 topology."""
from .config import FlowConfig, build_config, PRESETS
from .lattice import LadderLattice, init_lattice
from .engine import run_flow
from .fd import MetricGrid, run_fd

__version__ = "0.1.0"
