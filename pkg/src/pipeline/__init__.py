# src/pipeline/__init__.py
"""Các tác vụ được main.py điều phối."""
