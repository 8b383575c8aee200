"""Persistence: run manifests, checkpoints, trajectory logs and CSV outputs."""
