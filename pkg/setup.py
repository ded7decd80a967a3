#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

import setuptools

install_requires = [
   'numpy>=1.22.0',
   'scipy>=1.8.0',
   'pandas>=1.4.0',
]

with open("README.md", "r", encoding='UTF-8') as fh:
    long_description = fh.read()

setuptools.setup(
    name='fsfpid',
    version='1.0.0',
    author='풀스택패밀리 연구소',
    author_email='contact@fullstack.re.kr',
    description='Projected inverse dynamics impedance control with friction-constrained contact wrenches',
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={"fsfpid": ["data/*.json"]},
    install_requires=install_requires,
    entry_points={"console_scripts": ["fsfpid=fsfpid.__main__:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering",
        "Topic :: Software Development :: Libraries :: Python Modules",
    ],
    python_requires='>=3.8',
    keywords="robotics manipulator inverse-dynamics impedance-control friction-cone quadratic-programming",
)
