"""Mutants that mimic a vulnerability, found without running them twice.

The pipeline lexes Java-style sources, abstracts identifiers and
literals into category IDs, generates single-token mutants from masked
predictions, labels each mutant by comparing its failing tests against
the vulnerability's, and trains a sequence-embedding plus random-forest
classifier to predict mimicry statically. Each stage lives in its own
module and exchanges plain JSON artifacts; see the CLI in
:mod:`mimicry.cli` for the end-to-end flow.
"""

__version__ = "0.1.0"
