#!/usr/bin/env python

from setuptools import setup, find_packages

with open('README.md') as f:
    long_description = f.read()

setup(
    name='smoothtensor',
    version='0.1.0',
    long_description=long_description,
    long_description_content_type='text/markdown',
    description='Smoothed analysis of tensor methods: robust independence, subspace recovery, FOOBI, HMM learning',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    license='MIT',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    python_requires='>=3.8',
    install_requires=[
        'numpy >= 1.17',
        'scipy >= 1.6',
    ],
    entry_points={
        'console_scripts': ['smoothtensor = smoothtensor.expcli:main'],
    },
)
