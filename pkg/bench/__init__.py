"""
Benchmark Runner

Configuration loading, experiment registry and the command-line entry
point for reproducing the sampler comparisons.
"""
