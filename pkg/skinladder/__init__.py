# coding: utf-8
'''Liouvillian skin effect of a measured-feedback two-leg fermionic ladder'''

__version__ = "0.1.0"
