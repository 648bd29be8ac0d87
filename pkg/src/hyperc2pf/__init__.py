"""Simulator for a hyper-parallel controlled-controlled-phase-flip gate on three photons.

Each photon carries a polarization qubit and a spatial qubit; four NV-centre
cavities mediate the interactions. Modules:

* ``cavity``: reflection amplitudes of a single-sided NV cavity.
* ``hilbert``: state tensors and the optical elements acting on them.
* ``gate``: the scripted circuit, measurement and feed-forward.
* ``metrics``: average fidelity and efficiency versus coupling strength.
* ``netlist`` and ``cli``: text circuit format and command-line tool.
"""

__version__ = "0.1.0"
