"""webgym: a deterministic web-agent gym and experiment laboratory.

A browser-like environment with standardized observation/action spaces over a
simulated page backend, a seeded synthetic task suite, an agent/LLM layer
with dynamic prompt shrinking, and a parallel, reproducible study runner.
"""

__version__ = "0.1.0"

from .env import Env, EnvConfig, Episode, StepResult, make_env

__all__ = ["Env", "EnvConfig", "Episode", "StepResult", "make_env", "__version__"]
