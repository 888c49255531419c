"""Domain services: pricing methods, dispatch and CSV export."""
