"""Exact decision procedures for the Group and Identity Problems in SA(2,Z)."""

__all__: list[str] = []
