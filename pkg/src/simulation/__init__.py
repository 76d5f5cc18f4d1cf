"""
Monte-Carlo propagation of a single announcement over an AS topology
"""
