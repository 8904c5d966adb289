"""Shared-secret detection of injected or modified packets.

Per generation the source draws a random parity-check matrix P
(z x payload_symbols) and hands sinks, over a secure side channel, the
pair (P, H) with H = W @ P^T computed against the native payload matrix
W.  A sink accepts a decoded W' iff W' @ P^T == H.  A fixed nonzero error
E slips through iff E @ P^T == 0, which for uniform random P happens with
probability q^(-z * rank(E)); larger z buys exponentially better
detection at the cost of z * h secret symbols per generation.

Detection only: no attempt is made to locate or correct the modification,
and the secret is never piggybacked on coded traffic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spoc.gf import DimensionMismatchError, GaloisField


@dataclass
class ParitySecret:
    """Out-of-band secret for one generation: (P, H = W @ P^T)."""

    generation_id: int
    field: GaloisField
    parity: np.ndarray   # z x payload_symbols
    digest: np.ndarray   # h x z

    @property
    def z(self) -> int:
        return self.parity.shape[0]


def make_secret(field: GaloisField, W, z: int, rng: np.random.Generator,
                generation_id: int = 0) -> ParitySecret:
    """Draw P uniformly and bind it to W via H = W @ P^T."""
    if z < 1:
        raise ValueError("z must be >= 1")
    W = np.asarray(W, dtype=field.dtype)
    P = field.random(rng, (z, W.shape[1]))
    H = field.matmul(W, P.T)
    return ParitySecret(generation_id, field, P, H)


def verify(W_decoded, secret: ParitySecret) -> bool:
    """True iff the decoded payload matrix matches the bound digest."""
    W = np.asarray(W_decoded, dtype=secret.field.dtype)
    if W.ndim != 2 or W.shape[1] != secret.parity.shape[1] \
            or W.shape[0] != secret.digest.shape[0]:
        raise DimensionMismatchError(
            f"payload matrix {W.shape} incompatible with parity {secret.parity.shape} "
            f"/ digest {secret.digest.shape}"
        )
    return bool(np.array_equal(secret.field.matmul(W, secret.parity.T), secret.digest))
