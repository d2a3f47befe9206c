"""Experiment harnesses: portfolio, advertising and transportation."""
