"""Min-max Bayesian encoders trained with coding-rate reduction."""
