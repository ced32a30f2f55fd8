import pathlib

import pytest

from hwb import textio
from hwb.sigcat import validate_signature

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "hwb" / "corpus"


@pytest.fixture(scope="session")
def corpus():
    def load(name):
        return textio.load_document(CORPUS / f"{name}.hwb")
    return load


@pytest.fixture(scope="session")
def bool_sig():
    """One rigid sort with two constants; the smallest refutable world."""
    return validate_signature({
        "sorts": [], "rigid_sorts": ["Bool"],
        "ops": [], "rigid_ops": [("tt", (), "Bool"), ("ff", (), "Bool")],
        "rels": [], "rigid_rels": [],
        "nominals": ["k"], "modalities": [("lam", 2)],
    })


@pytest.fixture(scope="session")
def counter_sig():
    """A flexible counter next to a rigid scratch sort."""
    return validate_signature({
        "sorts": ["Nat"], "rigid_sorts": ["Elt"],
        "ops": [("zero", (), "Nat"), ("suc", ("Nat",), "Nat")],
        "rigid_ops": [("e", (), "Elt")],
        "rels": [("pos", ("Nat",))], "rigid_rels": [],
        "nominals": ["k1", "k2"], "modalities": [("lam", 2)],
    })
