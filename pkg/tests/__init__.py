"""Test suite for levy-expansion."""
