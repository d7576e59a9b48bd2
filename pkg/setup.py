from setuptools import setup, find_packages
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(name='metadutils',
    version='0.1.0',
    description="Meta-d' and signal detection analysis of confidence ratings",
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='MIT',
    packages=find_packages(exclude=['contrib', 'docs', 'tests']),
    package_data={'metadutils': ['templates/*.j2']},
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.5',
        'requests',
        'jinja2>=2.11',
        'tomli; python_version < "3.11"',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'metadutils=metadutils.cli:main',
            'metad_simulate=metadutils.metad_simulate:main',
            'metad_fit=metadutils.metad_fit:main',
            'metad_compare=metadutils.metad_compare:main',
            'metad_run=metadutils.metad_run:main',
            'metad_report=metadutils.metad_report:main',
            'metad_validate_dataset=metadutils.metad_validate_dataset:main'
        ],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering'
    ]
)
