"""Local realism without setting freedom, and what it costs key distribution.

Subpackages map onto the layers of the analysis:

- :mod:`freebell.lhv_core`      two-party CHSH set constraint and the lack-of-freedom measure
- :mod:`freebell.mermin`        N-party Mermin bounds and the per-setting saturation law
- :mod:`freebell.quantum_model` closed-form spin-1/2 statistics on the pi/4 grid
- :mod:`freebell.qkd`           BBM-CHSH protocol under partial setting knowledge
- :mod:`freebell.security`      mutual informations, thresholds and verdicts
- :mod:`freebell.cli`           command-line front end
"""

__version__ = "0.1.0"
ARTIFACT_NAME = "freebell"
