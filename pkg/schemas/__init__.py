"""
Data Schemas Module

Pydantic models for data structures:
- experiment_config: The JSON experiment file accepted by the benchmark runner
"""
