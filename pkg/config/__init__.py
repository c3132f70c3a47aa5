"""Configuration package for tvcut"""
