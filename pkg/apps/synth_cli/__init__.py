"""
Synth CLI - единая точка входа генератора синтетических датасетов.
"""

__version__ = "1.0.0"
