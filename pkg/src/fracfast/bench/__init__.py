"""Benchmark harness: model problems, experiment sweeps, metrics and checks."""
