# src/config/__init__.py
"""Cấu hình runtime và đường dẫn output."""
