#!/usr/bin/env python3
"""
Pin the SMI of the overlap spec used by the acceptance tests.

Writes slicedmi/tests/fixtures/overlap_oracle.json from the reduced
two-dimensional quadrature; without the file the test session evaluates the
same integral on first use.
"""
import json
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from slicedmi.tests.conftest import OVERLAP_FIXTURE, overlap_smi_quadrature

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def pin_overlap_oracle(path=OVERLAP_FIXTURE):
    """Evaluate the overlap SMI and write it as JSON"""
    value, error = overlap_smi_quadrature()
    document = {'value': round(value, 10), 'abs_error': max(error, 1e-8), 'method': 'quadrature'}
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, 'w') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write('\n')
    logger.info(f"Pinned overlap SMI {value:.10f} (+- {error:.1e}) to {path}")
    return document


def main():
    try:
        pin_overlap_oracle()
    except Exception as e:
        logger.error(f"Error pinning oracle fixture: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
