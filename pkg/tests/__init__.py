"""Test suite for Ergoline."""
