"""Rate harness with theory rates and regression."""
