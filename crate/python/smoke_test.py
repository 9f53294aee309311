"""Smoke test for the qrev Python extension.

Build first:  pip install --no-build-isolation -e crates/python
"""

import math

import qrev


def main():
    spec = qrev.AnsatzSpec(2, 1, "rx,ry,rz")
    assert spec.n_params == 6, spec.n_params

    data = qrev.Dataset.synthetic_blobs(60, 2, seed=1)
    victim = qrev.train_qnn(spec, data, epochs=3, seed=1)
    assert len(victim.params) == 6
    assert 0.0 <= victim.accuracy(data) <= 1.0

    bound = victim.bound()
    transpiled, layout = qrev.transpile(bound, optimization_level=1)
    assert set(transpiled.gate_counts()) <= {"rz", "sx", "x", "cnot"}
    assert sorted(layout) == [0, 1]

    text = transpiled.to_text()
    again = qrev.Circuit.parse(text)
    assert again.to_text() == text

    lut = qrev.Lut.build(["rx,ry,rz"], optimization_level=1)
    structure = qrev.recover_structure(transpiled, lut)
    assert structure.n_params == 6
    assert {t for _, t, _ in structure.matches()} == {"rx,ry,rz"}

    params, candidates = qrev.recover_params_bf(structure, step=0.3)
    assert len(params) == 6 and candidates > 0
    rebuilt = structure.ansatz.bind(params)
    z_victim = bound.expval_z(0)
    z_rebuilt = rebuilt.expval_z(0)
    print(f"<Z0> victim {z_victim:+.4f}  recovered {z_rebuilt:+.4f}")

    ds = qrev.gen_dataset("ry", step=0.1)
    assert len(ds) == 63
    model, mae = qrev.RecoveryModel.train(ds, epochs=5, batch_size=16, seed=2)
    assert len(mae) == 5 and all(math.isfinite(m) for m in mae)
    model = qrev.RecoveryModel.from_text(model.to_text())
    assert model.template == "ry"

    ry_spec = qrev.AnsatzSpec(2, 1, "ry")
    ry_victim = qrev.train_qnn(ry_spec, data, epochs=2, seed=3).bound()
    ry_struct = qrev.recover_structure(qrev.transpile(ry_victim)[0], qrev.Lut.build(["ry"]))
    assert len(qrev.recover_params_ae(ry_struct, [model])) == 2

    try:
        qrev.recover_params_ae(structure, [model])
    except qrev.QrevError as e:
        print("missing model reported:", e)
    else:
        raise AssertionError("expected a missing-model error")

    report = qrev.evaluate(ry_spec, data, method="brute", seed=4, qnn_epochs=2, retrain_epochs=2)
    assert report["n_params"] == 2 and report["structure_exact"]
    print("evaluate:", report["classifier"], report["method"], report["param_mean_abs_error"])

    u = qrev.Circuit.parse("qubits 1\nphase 0\nsx q0\nsx q0\n").unitary()
    assert abs(abs(u[0][1]) - 1.0) < 1e-12
    print("smoke test passed")


if __name__ == "__main__":
    main()
