"""Energy-optimal motion camouflage trajectories, guidance and scenario tooling."""

__version__ = "1.0.0"
