"""Tests for cantor_rings."""
