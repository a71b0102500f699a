from setuptools import find_packages, setup

setup(
    name="trajectory-interaction-miner",
    version="0.1.0",
    description="Select, organize, assess and enhance vehicle interactions with traffic lights and stop signs",
    packages=find_packages(exclude=("tests", "tests.*")),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=[
        "pydantic>=2.6",
        "python-dotenv>=1.0",
        "pyyaml>=6.0",
        "pandas>=2.2",
        "numpy>=1.26,<2",
        "scipy>=1.11",
        "PyWavelets>=1.5",
        "rich>=13.7",
    ],
    entry_points={"console_scripts": ["trajectory-miner=main:main"]},
)
