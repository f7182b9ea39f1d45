"""
Component level tests for fakemix-toolkit.

These drive the fakemix command line end to end on small synthetic datasets
written to temporary directories.
"""
