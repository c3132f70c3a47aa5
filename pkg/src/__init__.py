"""tvcut source package"""
