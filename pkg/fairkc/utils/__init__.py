"""Shared helpers: errors, validation schemas, report export, resources."""
