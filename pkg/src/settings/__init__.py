"""Run configuration and component construction."""
