from setuptools import setup, find_packages

from pathlib import Path
long_description = (Path(__file__).parent / "README.md").read_text()

setup(
      name='qspring',
      version='0.1',
      description="qspring: Gaussian and truncated-Fock simulation of cavity-mediated "
                  "atom-membrane strong coupling in JAX.",
      long_description=long_description,
      long_description_content_type='text/markdown',
      license="MIT License",
      packages=find_packages(exclude=['tests', 'tests.*']),
      install_requires=[
          'jax>=0.4.12',
          'numpy>=1.24',
          'scipy>=1.10',
          'tqdm>=4.66',
          'termcolor>=2.3'
      ],
      extras_require={
          'test': ['pytest>=7.0']
      },
      python_requires=">=3.9",
      package_data={'qspring': ['examples/configs/*.cfg', 'core/assets/*.json']},
      include_package_data=True,
      entry_points={ 
          'console_scripts': [ 'qspring=qspring.entry_point:main'],
      },
      classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
