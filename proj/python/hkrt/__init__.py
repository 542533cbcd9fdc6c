"""Frequency-ordered k-ary hash trees for pseudonym revocation."""

from ._core import (
    Error,
    MasterKeys,
    MetricsReport,
    PseudonymPrivateKey,
    RevocationProof,
    RevocationTree,
    SimConfig,
    build_tree,
    decode_proof,
    decode_tree,
    extract,
    pseudonym_from_hex,
    run_simulation,
    setup,
    sign,
    verify,
    verify_proof,
)

__all__ = [
    "Error",
    "MasterKeys",
    "MetricsReport",
    "PseudonymPrivateKey",
    "RevocationProof",
    "RevocationTree",
    "SimConfig",
    "build_tree",
    "decode_proof",
    "decode_tree",
    "extract",
    "pseudonym_from_hex",
    "run_simulation",
    "setup",
    "sign",
    "verify",
    "verify_proof",
]
