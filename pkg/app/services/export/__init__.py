"""CSV export of benchmark tables and parameter sweeps."""
