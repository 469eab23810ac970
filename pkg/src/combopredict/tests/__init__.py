"""
Unit tests for combopredict.
"""
