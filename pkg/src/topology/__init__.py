"""
AS-level topologies, routing, and centrality
"""
