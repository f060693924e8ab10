"""Smoke test for the rvcast Python bindings.

Build and install with maturin:
    maturin develop --release -m crates/py/Cargo.toml
    python python/smoke_test.py

or without maturin:
    cargo build -p rvcast-py --release --features extension-module
    mkdir -p build/py
    cp target/release/librvcast.so \
        build/py/rvcast$(python3 -c "import sysconfig; print(sysconfig.get_config_var('EXT_SUFFIX'))")
    PYTHONPATH=build/py python python/smoke_test.py
"""

import json
import math
import pathlib
import random
import tempfile

import rvcast

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    rng = random.Random(3)
    x = [rng.gauss(0.0, 1.0) for _ in range(200)]
    s = rvcast.summarize(x)
    assert s["n"] == 200 and abs(s["mean"]) < 0.3
    for name, result in [
        ("jarque_bera", rvcast.jarque_bera(x)),
        ("ljung_box", rvcast.ljung_box(x, 10)),
        ("arch_lm", rvcast.arch_lm(x, 5)),
        ("adf", rvcast.adf(x)),
    ]:
        assert math.isfinite(result["statistic"]), name

    r = rvcast.garch_simulate(1e-6, 0.08, 0.90, 5000, 1)
    g = rvcast.garch_fit(r)
    assert g["model"] == "garch" and abs(g["params"]["alpha"] + g["params"]["beta"] - 0.98) < 0.05
    f = rvcast.garch_forecast(1e-6, 0.08, 0.90, r[-1] ** 2, 5e-5, 5)
    assert len(f) == 5 and all(v > 0 for v in f)

    rv = rvcast.har_simulate([1e-5, 0.35, 0.35, 0.2], [1e-4] * 22, 600, 1e-5, 2)
    h = rvcast.har_fit(rv)
    betas = [h["params"][k] for k in ("beta0", "beta1", "beta2", "beta3")]
    assert len(rvcast.har_forecast(betas, rv, 3)) == 3

    p = rvcast.point_losses([1.1, 1.8], [1.0, 2.0])
    assert abs(p["rmse"] ** 2 - p["mse"]) < 1e-12
    assert rvcast.qlike([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rvcast.qlike([2.0], [1.0]) > 0.0

    net = rvcast.Network.fit("gru", rv[:300], epochs=2, seed=5)
    pred = net.predict(rv[300 - net.sequence_length:300])
    back = rvcast.Network.from_json(net.to_json())
    assert back.predict(rv[300 - net.sequence_length:300]) == pred
    assert json.loads(net.to_json())["kind"] == "gru"

    with tempfile.TemporaryDirectory() as out:
        csv = rvcast.run_backtest(str(ROOT / "data" / "sample_config.json"), out)
        assert csv.startswith("loss,model,1d,5d")
        assert (pathlib.Path(out) / "losses.csv").read_text() == csv
        rows = rvcast.run_summarize(str(ROOT / "data" / "sample_config.json"), out)
        assert [row["series"] for row in rows] == ["return", "rv"]

    print("rvcast", rvcast.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
