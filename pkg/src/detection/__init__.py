"""A contrario detection"""
