"""Tests for prolongkit.loguru module."""
