"""kNN evaluation of NetD and sampled NetG features."""
