import json

import numpy as np
import pytest

from ngmca.algorithms import AlgorithmConfig
from ngmca.datagen import InstanceSpec, gen_instance
from ngmca.io import (algorithm_config_from_dict, instance_spec_from_dict,
                      read_container, read_factors, read_instance,
                      write_container, write_factors, write_instance)


class TestContainer:
    def test_round_trip(self, tmp_path, gen):
        arrays = {"x": gen.standard_normal((3, 4)),
                  "y": gen.random((2, 2))}
        meta = {"kind": "demo", "n": 7}
        path = tmp_path / "c.bin"
        write_container(path, meta, arrays)
        meta2, arrays2 = read_container(path)
        assert meta2 == meta
        for k in arrays:
            np.testing.assert_array_equal(arrays2[k], arrays[k])

    def test_header_is_json_with_length_prefix(self, tmp_path):
        path = tmp_path / "c.bin"
        write_container(path, {"a": 1}, {"m": np.zeros((1, 1))})
        raw = path.read_bytes()
        n = int.from_bytes(raw[:8], "little")
        header = json.loads(raw[8:8 + n])
        assert header["a"] == 1

    def test_payload_is_little_endian_float64(self, tmp_path):
        m = np.arange(6, dtype=float).reshape(2, 3)
        path = tmp_path / "c.bin"
        write_container(path, {}, {"m": m})
        raw = path.read_bytes()
        n = int.from_bytes(raw[:8], "little")
        payload = np.frombuffer(raw[8 + n:], dtype="<f8")
        np.testing.assert_array_equal(payload, m.ravel())


class TestInstanceIo:
    def test_round_trip(self, tmp_path):
        inst = gen_instance(InstanceSpec(m=10, n=12, r=2, p_S=0.4,
                                         snr_db=20.0, seed=3))
        path = tmp_path / "inst.bin"
        write_instance(path, inst)
        back = read_instance(path)
        np.testing.assert_array_equal(back.y, inst.y)
        np.testing.assert_array_equal(back.a_ref, inst.a_ref)
        np.testing.assert_array_equal(back.s_ref, inst.s_ref)
        np.testing.assert_array_equal(back.z, inst.z)
        assert back.spec == inst.spec

    def test_factors_round_trip(self, tmp_path, gen):
        a, s = gen.random((5, 2)), gen.random((2, 6))
        path = tmp_path / "f.bin"
        write_factors(path, a, s, meta={"algorithm_id": "als"})
        a2, s2 = read_factors(path)
        np.testing.assert_array_equal(a2, a)
        np.testing.assert_array_equal(s2, s)


class TestConfigParsing:
    def test_instance_spec_fields(self):
        spec = instance_spec_from_dict(
            {"m": 30, "n": 40, "r": 4, "p_S": 0.2, "snr_db": 15.0,
             "seed": 11})
        assert spec == InstanceSpec(m=30, n=40, r=4, p_S=0.2, snr_db=15.0,
                                    seed=11)

    def test_noiseless_string(self):
        spec = instance_spec_from_dict({"snr_db": "noiseless"})
        assert spec.is_noiseless()

    def test_algorithm_config_nested_subsolver(self):
        cfg = algorithm_config_from_dict(
            {"algorithm_id": "ngmca_s", "rank": 4, "tau_final": 2.0,
             "subsolver": {"max_inner_iterations": 40}})
        assert isinstance(cfg, AlgorithmConfig)
        assert cfg.subsolver.max_inner_iterations == 40
        assert cfg.tau_final == 2.0

    def test_unknown_field_rejected(self):
        with pytest.raises(TypeError):
            algorithm_config_from_dict({"algorithm_id": "als",
                                        "learning_rate": 0.1})
