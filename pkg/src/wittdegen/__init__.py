"""Length-2 Witt vectors, twisted Witt group schemes and effective models
of degenerating Z/p^2-actions in equal characteristic p."""

__version__ = "0.1.0"
