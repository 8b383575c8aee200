"""Propose-Accept and Team Patches environments."""
