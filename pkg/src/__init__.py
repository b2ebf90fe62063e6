"""q-series evaluation and identity verification package."""
