"""Likelihoods, solvers and regularization paths."""
