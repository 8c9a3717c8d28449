"""Single-individual continuous-time correlated random walk."""
