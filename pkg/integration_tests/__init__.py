"""
Integration tests for the transport-selection package.

Runs every experiment on a small scenario through the same path as the ``tsl`` CLI:
- exact mixing checkpoints and truncations
- L^p distance ladders and unboundedness tables
- composed flows, compressibility and TV bounds
- k_q selection, finite-volume concordance and weak residuals
"""
