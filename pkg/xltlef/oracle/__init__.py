"""Ground-truth evaluators, trace constructions and property suites"""
