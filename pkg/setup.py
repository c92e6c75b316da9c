import sys

from setuptools import find_packages, setup

MIN_PYTHON_VERSION = (3, 10)
CURRENT_PYTHON = sys.version_info[:2]

if CURRENT_PYTHON < MIN_PYTHON_VERSION:
    print(
        f"ocrkit is only supported for Python version {MIN_PYTHON_VERSION}+."
        f" Detected you are on version {CURRENT_PYTHON}, installation will not proceed!"
    )
    sys.exit(-1)

setup(
    name="ocrkit",
    version="0.1.0",
    description="document parsing: OCR, layout structure, key information extraction",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "ocrkit=ocrkit_cli.main:main",
            "ocrkit-mcp=ocrkit_cli.main:mcp_entry",
        ]
    },
    install_requires=[
        "click>=8.2",
        "requests>=2.28",
        "urllib3>=1.26",
        "pyyaml>=6.0",
        "tqdm>=4.63.0",
        "numpy>=1.24",
        "opencv-python-headless>=4.8",
        "Pillow>=10.0",
        "PyMuPDF>=1.23",
        "pydantic>=2.5",
        "fastapi>=0.110",
        "uvicorn>=0.27",
        "fastmcp>=2.10",
    ],
    classifiers=[
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
