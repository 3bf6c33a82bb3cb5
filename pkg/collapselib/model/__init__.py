""" Spontaneous localization models: marble states, collapse dynamics, interpretation criteria and the counting
chain. """
