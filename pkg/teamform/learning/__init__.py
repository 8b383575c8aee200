"""Numpy networks, optimizers and the learners built on them."""
