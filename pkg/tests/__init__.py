"""Tests for bundle-control."""
