"""
Loguru setup for the command line and library diagnostics.

https://github.com/Delgan/loguru
"""
