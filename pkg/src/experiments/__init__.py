"""
Experiment configuration, commands and reproductions
"""
