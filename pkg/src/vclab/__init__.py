"""Constructing and checking verbally-but-not-algebraically closed embeddings of finite groups."""

__version__ = "0.1.0"
