"""ballopt: principal eigenvalues of bang-bang indefinite weights on grid
domains, optimal placement of the favorable ball, and the small-volume
asymptotics of the optimal eigenpair."""

__version__ = "0.1.0"
