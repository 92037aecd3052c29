#!/usr/bin/env python3
"""
Wrapper script to run the constraint analyzer CLI from the repository root.
"""

import sys
from pathlib import Path

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

if __name__ == "__main__":
    from cli.__main__ import main
    sys.exit(main())
