# -*- coding: utf-8 -*-
"""Package declaring 'privacy_power' version."""
__version__ = "0.1.0"
