"""LDPC graph construction with Multipath EMD progressive edge growth."""
