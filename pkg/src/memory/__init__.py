"""In-process memory of experiment contexts and report history."""
