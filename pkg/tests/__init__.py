"""Unit test package for trollgraph."""
