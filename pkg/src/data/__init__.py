"""Problem types, coefficient presets and drift bases."""
