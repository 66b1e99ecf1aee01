"""File formats: PLY clouds, artifacts, manifests and segmentation maps"""
