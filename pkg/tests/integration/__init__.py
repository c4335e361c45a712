"""Integration tests that run the bundled scenario suite end to end."""
