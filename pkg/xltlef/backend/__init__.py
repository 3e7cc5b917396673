"""Model-checking backend: transition systems, SMT sessions and engines"""
