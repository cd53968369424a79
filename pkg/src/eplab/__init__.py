"""eplab: energy/performance laboratory for network-driven request processing.

Subpackages and modules:

- eplab.model     analytic time/energy model and normalized curves
- eplab.engine    discrete-event simulator of the request timeline
- eplab.sweep     (delta x interrupt-delay) grid experiments and markers
- eplab.fitting   model parameter inference from sweep or measured data
- eplab.tracelog  per-interrupt / per-millisecond trace format
- eplab.repo      content-addressed artifact store
- eplab.cli       command-line front door
- eplab.service   read-mostly HTTP API for the explorer and scripts
"""

__version__ = "0.1.0"
