"""
Analytic models: per-hop update times, data-plane bounds, control-plane chain
"""
