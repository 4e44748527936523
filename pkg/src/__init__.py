"""Cocycle workbench package"""
