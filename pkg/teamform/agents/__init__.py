"""Hand-crafted baseline agents."""
