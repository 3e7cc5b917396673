"""Formula representation and the translation pipeline"""
