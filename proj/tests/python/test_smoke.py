import hashlib
import json

import pytest

import hkrt


def pseudonym(i):
    return hashlib.sha3_256(b"py-%d" % i).digest()


@pytest.fixture
def master():
    return hkrt.setup(7)


def test_sign_verify_round_trip(master):
    key = hkrt.extract(master, pseudonym(1))
    sig = hkrt.sign(key, b"hello")
    assert hkrt.verify(master.master_public, pseudonym(1), b"hello", sig)
    assert not hkrt.verify(master.master_public, pseudonym(2), b"hello", sig)
    assert not hkrt.verify(master.master_public, pseudonym(1), b"hellp", sig)


def test_ed25519_backend():
    master = hkrt.setup(3, "ed25519")
    assert master.backend == "ed25519"
    key = hkrt.extract(master, pseudonym(4))
    sig = hkrt.sign(key, b"m")
    assert hkrt.verify(master.master_public, pseudonym(4), b"m", sig)


def test_build_prove_verify(master):
    leaves = [(pseudonym(i), 0, f) for i, f in enumerate([10, 6, 2, 1, 1])]
    tree = hkrt.build_tree(leaves, 3, 4, master)
    assert tree.leaf_count == 5
    assert tree.weighted_path_length() == 24
    assert tree.lookup_path(pseudonym(0)) is not None
    assert tree.lookup_path(pseudonym(99)) is None

    proof = tree.generate_proof(pseudonym(0))
    assert proof.depth == 1
    assert hkrt.verify_proof(proof, pseudonym(0), master.master_public, 4) == (True, None)
    accepted, reason = hkrt.verify_proof(proof, pseudonym(0), master.master_public, 100)
    assert not accepted and reason == "stale"
    assert tree.generate_proof(pseudonym(99)) is None


def test_codec_round_trip(master):
    leaves = [(pseudonym(i), 1, i + 1) for i in range(12)]
    tree = hkrt.build_tree(leaves, 4, 2, master)
    again = hkrt.decode_tree(tree.encode())
    assert again.root_digest == tree.root_digest
    proof = hkrt.decode_proof(tree.generate_proof(pseudonym(3)).encode())
    assert proof.pseudonym == pseudonym(3)
    assert hkrt.verify_proof(proof, pseudonym(3), master.master_public, 2)[0]


def test_errors_raise(master):
    with pytest.raises(hkrt.Error):
        hkrt.build_tree([], 3, 0, master)
    with pytest.raises(hkrt.Error):
        hkrt.build_tree([(pseudonym(1), 0, 1)], 1, 0, master)
    with pytest.raises(hkrt.Error):
        hkrt.decode_tree(b"nope")
    assert issubclass(hkrt.Error, ValueError)


def test_simulation():
    cfg = hkrt.SimConfig()
    cfg.num_obus = 50
    cfg.num_revoked = 120
    cfg.epochs = 3
    cfg.queries_per_epoch = 800
    cfg.cheater_rsu_ids = [2]
    report = hkrt.run_simulation(cfg)
    assert report.queries == 2400
    assert report.cheaters_revoked == 1
    assert report.to_text() == hkrt.run_simulation(cfg).to_text()
    assert json.loads(report.to_json())["queries"] == 2400

    round_trip = hkrt.SimConfig.from_json(cfg.to_json())
    assert round_trip.to_json() == cfg.to_json()
    with pytest.raises(hkrt.Error):
        hkrt.SimConfig.from_json('{"bogus": 1}')
