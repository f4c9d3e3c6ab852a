from setuptools import setup
from os import path


def read(fn):
    dir = path.dirname(path.abspath(__file__))
    with open(path.join(dir, fn)) as fp:
        return fp.read()


setup(
    name='gsm_field',
    version=read('VERSION').strip(),
    description='distance fields, distance gradients and collision probabilities of ellipsoids against Gaussian '
                'surface models',
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    packages=['gsm_field'],
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'scipy',
        'matplotlib',
        'pandas>=1.5',
        'tqdm',
    ],
    extras_require={
        'tests': ['pytest'],
    },
    entry_points={
        'console_scripts': ['gsm-field=gsm_field.cli:main'],
    },
)
