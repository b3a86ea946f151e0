from setuptools import setup, find_packages
setup(
    name = "magicwit",
    version = "0.1.0",
    packages = find_packages(exclude=["magicwit.test"]),
    install_requires = ['numpy>=1.22', 'scipy>=1.8', 'dulwich>=0.21,<0.23'],
    tests_require = ['pynose>=1.4'],
    extras_require = {'test': ['pynose>=1.4', 'pytest>=7']},
    test_suite = 'nose.collector',
    zip_safe = True,

    description = "Stabilizer, quantum and local values of Bell inequalities over qubit and qudit graph states.",
    license = "PSF",
    keywords = "bell inequality stabilizer graph state magic witness see-saw",
    entry_points={
        'console_scripts': ['magicwit = magicwit.cli:main']
    },
)
