import os
import tempfile
import unittest

import numpy as np

from tdvp_toolkit_lib import experiment
from tdvp_toolkit_lib import inout
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib.experiment import ExperimentConfig


MINIMAL = "[model]\ntype = hubbard\n[run]\nmode = exact\n"


class TestConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = experiment.parse_config(MINIMAL)
        self.assertEqual(cfg.mode, "exact")
        self.assertEqual((cfg.L, cfg.J, cfg.u, cfg.mu, cfg.kappa), (4, 1.0, 4.0, -2.0, 1.0))
        self.assertTrue(cfg.periodic)
        self.assertEqual(cfg.dt, 1e-3)
        self.assertEqual(cfg.sample_interval, 0.05)
        self.assertEqual(cfg.t_final, 20.0)
        self.assertEqual(cfg.alphas, [0.5])
        self.assertEqual(cfg.norm, "frobenius")

    def test_values(self):
        cfg = experiment.parse_config(
            "[model]\ntype = hubbard\nL = 2\nperiodic = false\nmu = -1.5\n"
            "[run]\nmode = tdvp\nalpha = 0.25, 0.75\nchart = full\n"
            "[output]\nformat = json-lines\n"
        )
        self.assertEqual(cfg.L, 2)
        self.assertFalse(cfg.periodic)
        self.assertEqual(cfg.mu, -1.5)
        self.assertEqual(cfg.alphas, [0.25, 0.75])
        self.assertEqual(cfg.chart, "full")
        self.assertEqual(cfg.output_format, "json-lines")
        self.assertFalse(cfg.hubbard_params().periodic)

    def test_duplicate_key(self):
        text = "[run]\nmode = exact\nmode = compare\n[model]\ntype = hubbard\n"
        with self.assertRaises(misc.ConfigError) as ctx:
            experiment.parse_config(text)
        self.assertEqual(ctx.exception.lineno, 3)
        self.assertIn("mode", str(ctx.exception))
        self.assertTrue(str(ctx.exception).startswith("line 3:"))

    def test_invalid_configs(self):
        bad = [
            # Unknown key, unknown section, type mismatch.
            MINIMAL + "kappa_x = 1\n",
            MINIMAL + "[plot]\ncolor = red\n",
            "[model]\ntype = hubbard\nL = four\n[run]\nmode = exact\n",
            # Missing required keys.
            "[model]\ntype = hubbard\n",
            "[run]\nmode = exact\n",
            "mode = exact\n",
            # Invalid values.
            "[model]\ntype = hubbard\n[run]\nmode = walk\n",
            "[model]\ntype = hubbard\nL = 1\n[run]\nmode = exact\n",
            "[model]\ntype = hubbard\nkappa = -1\n[run]\nmode = exact\n",
            "[model]\ntype = hubbard\n[run]\nmode = tdvp\nalpha = 1.5\n",
            "[model]\ntype = hubbard\n[run]\nmode = exact\ndt = 0\n",
            "[model]\ntype = hubbard\n[run]\nmode = exact\ndt = 0.01\nsample_interval = 0.015\n",
            "[model]\ntype = hubbard\n[run]\nmode = exact\nnorm = trace\n",
            "[model]\ntype = file\n[run]\nmode = exact\n",
            "[model]\ntype = random\n[run]\nmode = exact\n",
            "[model]\ntype = random\nn_modes = 2\ninitial = polarized\n[run]\nmode = exact\n",
        ]
        for text in bad:
            with self.assertRaises(misc.ConfigError):
                experiment.parse_config(text)

    def test_error_line_of_invalid_value(self):
        with self.assertRaises(misc.ConfigError) as ctx:
            experiment.parse_config("[model]\ntype = hubbard\n\nL = 1\n[run]\nmode = exact\n")
        self.assertEqual(ctx.exception.lineno, 4)

    def test_error_line_of_unknown_section(self):
        with self.assertRaises(misc.ConfigError) as ctx:
            experiment.parse_config(MINIMAL + "[plot]\ncolor = red\n")
        self.assertEqual(ctx.exception.lineno, 5)
        self.assertTrue(str(ctx.exception).startswith("line 5:"))
        self.assertIn("[plot]", str(ctx.exception))

    def test_serialize_roundtrip(self):
        cfg = experiment.parse_config(
            "[model]\ntype = random\nn_modes = 2\n[run]\nmode = compare\nalpha = 0.1, 0.9\nseed = 7\n"
        )
        self.assertEqual(experiment.parse_config(experiment.serialize_config(cfg)), cfg)

    def test_missing_file(self):
        with self.assertRaises(misc.ConfigError):
            experiment.load_config("/nonexistent/experiment.ini")


class TestRun(unittest.TestCase):

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def config(self, mode, sub="out", **kwargs):
        values = dict(L=2, t_final=0.1, dt=0.01, sample_interval=0.05)
        values.update(kwargs)
        return ExperimentConfig(mode=mode, output_dir=os.path.join(self.dir, sub), **values)

    def test_exact_closed_system(self):
        cfg = self.config("exact", kappa=0.0)
        self.assertEqual(experiment.run(cfg), experiment.EXIT_OK)
        traj = inout.load_trajectory(os.path.join(cfg.output_dir, "exact.csv"))
        self.assertTrue(np.allclose(traj["t"], [0.0, 0.05, 0.1]))
        self.assertTrue(np.allclose(traj["purity"], 1.0, atol=1e-9))
        self.assertTrue(np.allclose(traj["n_up"] + traj["n_down"], 2.0, atol=1e-9))

        manifest = inout.load_json(os.path.join(cfg.output_dir, "manifest.json"))
        self.assertEqual(manifest["exit_status"], 0)
        self.assertEqual(manifest["files"], ["exact.csv"])
        self.assertEqual(manifest["time_unit"], "1/J")
        self.assertEqual(experiment.parse_config(manifest["config"]), cfg)

    def test_exact_is_deterministic(self):
        a = self.config("exact", sub="a")
        b = self.config("exact", sub="b")
        self.assertEqual(experiment.run(a), 0)
        self.assertEqual(experiment.run(b), 0)
        with open(os.path.join(a.output_dir, "exact.csv"), "rb") as fa, \
                open(os.path.join(b.output_dir, "exact.csv"), "rb") as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_compare(self):
        cfg = self.config("compare")
        self.assertEqual(experiment.run(cfg), 0)
        names = sorted(os.listdir(cfg.output_dir))
        self.assertEqual(names, ["compare.csv", "exact.csv", "gaussified.csv", "manifest.json"])
        cmp = inout.load_trajectory(os.path.join(cfg.output_dir, "compare.csv"))
        self.assertEqual(len(cmp["t"]), 3)
        self.assertTrue(cmp["dGamma"][0] < 1e-10)
        self.assertTrue(np.all(cmp["dRho"] >= 0))
        manifest = inout.load_json(os.path.join(cfg.output_dir, "manifest.json"))
        self.assertIn("clip_events", manifest)
        self.assertEqual(manifest["time_unit"], "1/kappa")

    def test_gaussified_polarized(self):
        cfg = self.config("gaussified", initial="polarized", output_format="json-lines")
        self.assertEqual(experiment.run(cfg), 0)
        traj = inout.load_trajectory(os.path.join(cfg.output_dir, "gaussified.jsonl"))
        self.assertTrue(np.allclose(traj["n_up"], 2.0, atol=1e-9))
        self.assertTrue(np.allclose(traj["n_down"], 0.0, atol=1e-9))
        self.assertTrue(np.allclose(traj["C1"], 0.25, atol=1e-9))

    def test_tdvp_pure_state_aborts(self):
        cfg = self.config("tdvp", initial="polarized")
        self.assertEqual(experiment.run(cfg), experiment.EXIT_NUMERICAL_ABORT)
        manifest = inout.load_json(os.path.join(cfg.output_dir, "manifest.json"))
        self.assertEqual(manifest["exit_status"], 3)
        self.assertIn("error", manifest)

    def test_tdvp_ground_state(self):
        cfg = self.config("tdvp", t_final=0.02, dt=0.01, sample_interval=0.01, alphas=[0.25, 0.75])
        self.assertEqual(experiment.run(cfg), 0)
        for name in ("tdvp_alpha=0.250.csv", "tdvp_alpha=0.750.csv"):
            traj = inout.load_trajectory(os.path.join(cfg.output_dir, name))
            self.assertEqual(len(traj["t"]), 3)

    def test_verify(self):
        cfg = self.config("verify-theorem1", model_type="random", n_modes=2, cases=2)
        self.assertEqual(experiment.run(cfg), 0)
        report = inout.load_json(os.path.join(cfg.output_dir, "verify_theorem1.json"))
        self.assertTrue(report["passed"])
        self.assertEqual(report["tangent_dimension"]["entries"][0]["rank"], 6)

    def test_random_model(self):
        cfg = self.config("exact", model_type="random", n_modes=3)
        self.assertEqual(experiment.run(cfg), 0)
        traj = inout.load_trajectory(os.path.join(cfg.output_dir, "exact.csv"))
        # Spin columns need an even number of modes.
        self.assertTrue(np.all(np.isnan(traj["m_s"])))
        self.assertTrue(np.all(traj["purity"] <= 1.0 + 1e-9))

    def test_error_statuses(self):
        missing = self.config("exact", sub="missing", model_type="file", spec_path="/nonexistent/spec.json")
        self.assertEqual(experiment.run(missing), experiment.EXIT_CONFIG_ERROR)
        too_large = self.config("exact", sub="large", L=7)
        self.assertEqual(experiment.run(too_large), experiment.EXIT_CONFIG_ERROR)

    def test_unsupported_degree_is_config_error(self):
        # n_0 n_1 n_2 has Majorana degree 6.
        spec_path = os.path.join(self.dir, "sextic.json")
        ops = [[m, s] for m in range(3) for s in ("+", "-")]
        inout.save_json(spec_path, {
            "n_modes": 3,
            "hamiltonian": [{"coef": 1.0, "ops": ops}],
            "jumps": [],
            "initial_occupied": [0],
        })
        for mode in ("gaussified", "compare"):
            cfg = self.config(mode, sub=mode, model_type="file", spec_path=spec_path)
            self.assertEqual(experiment.run(cfg), experiment.EXIT_CONFIG_ERROR)
            manifest = inout.load_json(os.path.join(cfg.output_dir, "manifest.json"))
            self.assertEqual(manifest["exit_status"], 2)
            self.assertIn("degree 6", manifest["error"])
        # The dense engine has no degree limit.
        cfg = self.config("exact", sub="exact", model_type="file", spec_path=spec_path)
        self.assertEqual(experiment.run(cfg), experiment.EXIT_OK)

    def test_manifest_is_reproducible(self):
        a = self.config("compare", sub="a")
        b = self.config("compare", sub="b")
        self.assertEqual(experiment.run(a), 0)
        self.assertEqual(experiment.run(b), 0)
        ma = inout.load_json(os.path.join(a.output_dir, "manifest.json"))
        mb = inout.load_json(os.path.join(b.output_dir, "manifest.json"))
        for m in (ma, mb):
            self.assertIn("started", m)
            self.assertTrue(m["wall_time_seconds"] >= 0)
        cfg_a = experiment.parse_config(ma["config"])
        cfg_a.output_dir = b.output_dir
        self.assertEqual(cfg_a, experiment.parse_config(mb["config"]))
        volatile = ("started", "wall_time_seconds", "config")
        self.assertEqual(
            {k: v for k, v in ma.items() if k not in volatile},
            {k: v for k, v in mb.items() if k not in volatile},
        )


class TestMain(unittest.TestCase):

    def test_exit_codes(self):
        self.assertEqual(experiment.main(["exact", "--config", "/nonexistent/experiment.ini"]), 2)
        self.assertEqual(experiment.main(["tdvp", "--alpha", "1.5"]), 2)

    def test_overrides(self):
        p = {"mode": "tdvp", "config": None, "out": "/tmp/x", "seed": 4, "alpha": "0.2,0.4",
             "dt": 0.01, "t_final": 1.0}
        cfg = experiment.config_from_params(p)
        self.assertEqual(cfg.mode, "tdvp")
        self.assertEqual(cfg.output_dir, "/tmp/x")
        self.assertEqual(cfg.seed, 4)
        self.assertEqual(cfg.alphas, [0.2, 0.4])
        self.assertEqual((cfg.dt, cfg.t_final), (0.01, 1.0))


if __name__ == "__main__":
    unittest.main()
