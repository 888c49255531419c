"""Test suite for the basket pricer."""
