"""Simulation tools: Brownian paths, schemes, mollifiers and diagnostics."""
