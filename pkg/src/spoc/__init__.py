"""Secure practical network coding.

Random linear network coding over GF(2^8)/GF(2^16) where the true coding
coefficients travel encrypted ("locked") in the packet header while
intermediate nodes recode normally over a plaintext ("unlocked")
coefficient set, plus a shared-secret parity check that lets sinks detect
injected traffic, and a deterministic round-based multicast simulator.
"""

from spoc.gf import GF256, GF65536, GaloisField, OpCounter

__all__ = ["GF256", "GF65536", "GaloisField", "OpCounter"]
__version__ = "0.1.0"
