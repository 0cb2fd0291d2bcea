from .trajectory_transform import TrajectoryTransform

__all__ = ["TrajectoryTransform"]
