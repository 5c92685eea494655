"""Shared utilities for Signbox."""
