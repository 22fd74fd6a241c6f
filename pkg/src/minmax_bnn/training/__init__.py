"""Alternating NetD / NetV training."""
