"""
Core Sampling Module

Numerical building blocks shared by the benchmark runner and the tests:
- linalg: Cholesky factors, rank-one updates, Gaussian sampling and densities
- adaptation: Running mean/covariance state of the adaptive proposal
- samplers: MH, TSMH, AM and TSAM kernels and the chain driver
- targets: Two-level targets (exact density plus cheap surrogate)
- ode: Fixed-step predator-prey integrators
- datasets: CSV loading and synthetic data generators
- diagnostics: ACF, ESS, EDPM and the replicate experiments
- trace_io: Trace and summary CSV files
"""
