# -*- coding: utf-8 -*-
#
# irsentropy documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.abspath('..'))

import irsentropy

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'irsentropy'
copyright = u'2024, Erik Moqvist'
author = u'Erik Moqvist'

version = irsentropy.__version__
release = irsentropy.__version__

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

# numpy and scipy are not needed to render the docs.
autodoc_mock_imports = ['nographs', 'numpy', 'scipy', 'humanfriendly']
autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'irsentropydoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
  (master_doc, 'irsentropy.tex', u'irsentropy Documentation',
   u'Erik Moqvist', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'irsentropy', u'irsentropy Documentation',
     [author], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
  (master_doc, 'irsentropy', u'irsentropy Documentation',
   author, 'irsentropy', 'Invariant random subgroups and their entropy.',
   'Miscellaneous'),
]
