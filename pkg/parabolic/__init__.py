"""
parabolic - thermodynamic formalism of parabolic rational maps at desk scale
"""

__version__ = '1.0.0'
