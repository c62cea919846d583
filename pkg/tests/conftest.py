import os
import sys

import hypothesis

sys.path.insert(0, os.path.dirname(__file__))  # makes `import oracles` work

hypothesis.settings.register_profile(
    "suite", derandomize=True, deadline=None, max_examples=50
)
hypothesis.settings.load_profile("suite")
