"""Colour-network descriptors for occlusion-robust 3D object recognition"""

__version__ = "1.0.0"
