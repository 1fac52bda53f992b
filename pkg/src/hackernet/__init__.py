"""Influence, community and cross-platform analysis of a malware-author ecosystem."""

__version__ = "0.1.0"
