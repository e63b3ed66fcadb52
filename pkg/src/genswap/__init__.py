"""genswap: mine minimal sentence pairs that expose gendered behavior in MT.

The pipeline ingests raw English text, keeps sentences with exactly one
gender-neutral person noun, swaps that noun for masked-LM candidates,
translates both sides into gender-marking languages, projects the person
token through a word aligner, tags its grammatical gender, and flags pairs
whose two sides come back with different genders.  A small HTTP service
exposes the flagged pairs for human adjudication.
"""

__version__ = "0.1.0"
