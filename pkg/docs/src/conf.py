# fakemix-toolkit documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath("../../src"))

# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
]

source_suffix = [".rst", ".md"]
master_doc = "index"

project = "fakemix-toolkit"
copyright = "2026, FakeMix Toolkit developers"
author = "FakeMix Toolkit developers"

version = "0.1.0"
release = "0.1.0"

language = "en"
exclude_patterns = []
pygments_style = "sphinx"

# -- Options for HTML output ----------------------------------------------

html_theme = "ska_ser_sphinx_theme"
html_theme_options = {}
htmlhelp_basename = "fakemixtoolkitdoc"

intersphinx_mapping = {"python": ("https://docs.python.org/3/", None)}
