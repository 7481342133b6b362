# Four-body central configurations toolkit
__version__ = "1.0.0"
