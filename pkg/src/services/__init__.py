"""Analysis services: phase space, reductions, cross-check, verification, reports."""
