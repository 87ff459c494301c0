#!/usr/bin/env python3

import glob
import os
import shutil
from contextlib import suppress
from distutils.command.clean import clean
import distutils.log as log

from setuptools import setup


class CleanCommand(clean):
    """
    Also remove wcotools.egg-info, and with --all, the bytecode
    caches under wcotools/ and tests/.
    """

    def run(self):
        dirs_to_remove = ["wcotools.egg-info"]

        if self.all:
            self.announce("Cleaning bytecode caches", level=log.INFO)
            for package in ("wcotools", "tests"):
                dirs_to_remove.extend(glob.glob(os.path.join(package, "**", "__pycache__"),
                                                recursive=True))
                for pyc in glob.glob(os.path.join(package, "**", "*.pyc"), recursive=True):
                    with suppress(OSError):
                        os.unlink(pyc)

        for dir_ in dirs_to_remove:
            shutil.rmtree(dir_, ignore_errors=True)

        clean.run(self)


setup(name='wcotools',
      version='1.0.0-dev',
      description='Weighted composition operator analysis tools.',
      author='the wcotools developers',
      cmdclass={'clean': CleanCommand},
      packages=['wcotools'],
      scripts=['wcolab'],
      package_data={'wcotools': ['report_schema.json']},
      test_suite='tests',
      license='GPLv2+, LGPLv2.1+',
      classifiers=[
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'Topic :: Scientific/Engineering :: Mathematics',
          'Topic :: Utilities',
      ],
      keywords='composition operator closed range polar decomposition measure space',
      python_requires='>=3.6',
      install_requires=['setuptools', 'networkx>=2.0', 'numpy>=1.17', 'scipy>=1.7',
                        'jsonschema>=3.0']
      )
