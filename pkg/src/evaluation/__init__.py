"""Answer metrics, run evaluation and parameter sweeps."""
