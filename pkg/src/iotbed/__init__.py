"""Security testbed for simulated IoT devices.

Scenarios drive security-test plugins, context simulation, forensic
analysis, and traffic-based device profiling against a deterministic
in-memory network or a real loopback-socket backend.
"""

__version__ = "0.1.0"
