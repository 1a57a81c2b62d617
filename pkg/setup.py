import setuptools
from setuptools import setup

setup(
    name='cgrp',
    version='v0.1',
    packages=setuptools.find_packages(exclude=['tests']),
    license='GNU GENERAL PUBLIC LICENSE',
    author='',
    author_email='',
    description='Compositional geometry routing: instances, classical solvers and neural kernels',
    install_requires=['torch>=1.8', 'numpy', 'pyyaml', 'tqdm', 'pandas>=1.5', 'wandb>=0.13'],
    extras_require={'test': ['pytest']},
    entry_points={
        'console_scripts': [
            'cgrp = cgrp.cli:main',
            'cgrp-gen = cgrp.generate:main',
            'cgrp-solve = cgrp.solve:main',
            'cgrp-bench = cgrp.bench:main',
            'cgrp-validate = cgrp.validate:main',
        ]}
)
