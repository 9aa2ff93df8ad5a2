#!/usr/bin/env python3
"""
Setup script for adiasearch - complete adiabatic quantum search simulator.
"""

from setuptools import setup, find_packages
import os

# Read the contents of README file
this_directory = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(this_directory, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

# Read requirements
with open(os.path.join(this_directory, 'requirements.txt'), encoding='utf-8') as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith('#')]

setup(
    name='adiasearch',
    version='1.0.0',
    description='Simulate complete adiabatic quantum search in unsorted databases',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests*', 'examples*']),
    include_package_data=True,
    package_data={
        'adiasearch': ['*.json'],
    },
    install_requires=requirements,
    python_requires='>=3.9',
    entry_points={
        'console_scripts': [
            'adiasearch=adiasearch.main:main',
        ],
    },
    keywords='adiabatic quantum search hamiltonian simulation spectral-gap',
    zip_safe=False,
)
