"""Data terms and field file I/O"""
