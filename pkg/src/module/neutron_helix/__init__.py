"""
Neutron in a helical magnetic field: spin dynamics, steady state and BO validity scans
"""
