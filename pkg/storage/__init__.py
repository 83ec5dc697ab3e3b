import os

# Replicate store used by a bare `simulate --store`
PATH = os.path.join(os.path.dirname(__file__), 'replicates.sqlite')
