"""Data contracts, settings and errors shared by every dppi package."""
