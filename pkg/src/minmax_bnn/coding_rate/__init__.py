"""Coding rates of feature sets and the min-max training objective."""
