# Sphinx configuration for the ocrkit documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "ocrkit"
copyright = "2025, the ocrkit developers"
release = "0.1.0"

extensions = ["myst_parser", "sphinx.ext.autodoc", "sphinx.ext.napoleon"]

templates_path = []
exclude_patterns = []

html_theme = "sphinx_book_theme"
html_static_path = []
html_title = "ocrkit"
