"""Tests for RapperRok AI Music API client."""
