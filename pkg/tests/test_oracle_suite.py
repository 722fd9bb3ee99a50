import json

from varlanczos.oracle_suite import run_oracle_suite, write_report


def test_default_seed_passes(tmp_path):
    report = run_oracle_suite(0)
    assert report["passed"], [r for r in report["results"] if not r["passed"]]
    names = {r["name"] for r in report["results"]}
    assert {"subspace_hamiltonian_hermitian", "degeneracy_n_eq_m_plus_1", "chebyshev_vs_exact"} <= names
    path = tmp_path / "r.json"
    write_report(report, path)
    assert json.loads(path.read_text())["seed"] == 0


def test_ten_seeds_all_pass():
    assert sum(run_oracle_suite(seed)["passed"] for seed in range(10)) == 10


def test_corrupted_symmetrization_is_caught():
    report = run_oracle_suite(0, corrupt_symmetrization=True)
    failed = [r["name"] for r in report["results"] if not r["passed"]]
    assert failed == ["subspace_hamiltonian_hermitian"]
