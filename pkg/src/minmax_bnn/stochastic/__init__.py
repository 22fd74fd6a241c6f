"""Mean and variance parameters, and sampled networks drawn from them.

A sampled network (NetG) is the mean network (NetD) perturbed by
softplus(v) * eps with eps standard normal, one draw per training step.
"""
