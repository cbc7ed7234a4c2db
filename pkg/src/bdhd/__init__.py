"""Boundary defense with heterogeneous defenders: exact and heuristic interception planners."""
