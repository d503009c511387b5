#!/usr/bin/env python

from setuptools import setup
from setuptools import find_packages
import irsentropy


if __name__ == "__main__":
    setup(name='irsentropy',
          version=irsentropy.__version__,
          description=('Intersectional invariant random subgroups and their '
                       'Furstenberg entropy.'),
          long_description=open('README.rst', 'r').read(),
          author='Erik Moqvist',
          author_email='erik.moqvist@gmail.com',
          license='MIT',
          classifiers=[
              'License :: OSI Approved :: MIT License',
              'Programming Language :: Python :: 3',
              'Topic :: Scientific/Engineering :: Mathematics',
          ],
          keywords=[
              'invariant random subgroup',
              'furstenberg entropy',
              'schreier graph',
              'random walk'
          ],
          packages=find_packages(exclude=['tests']),
          python_requires='>=3.9',
          install_requires=[
              'humanfriendly',
              'nographs',
              'numpy>=1.17',
              'scipy'
          ],
          entry_points={
              'console_scripts': ['irsentropy=irsentropy.cli:main']
          },
          test_suite="tests")
