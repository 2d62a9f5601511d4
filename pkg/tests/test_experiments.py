import numpy as np
import pytest
from hypothesis import given, strategies as st

from vexlap.errors import (ComponentBudgetExceeded, ConditionCheckFailed, DescriptorError, PreconditionViolated,
                           ResolutionTooCoarse)
from vexlap.experiments import ConvergenceTable, ExperimentConfig, make_source, run, trend_decreases
from vexlap.geometry import complement_components, hausdorff_complementary_distance, make_generator
from vexlap.mesh import build_mesh

UNIT = (0.0, 0.0, 1.0, 1.0)
POLY = "polygon_exhaustion(disk(0.5, 0.5, 0.4))"


def cfg(**kw):
    base = dict(kind="sverak", exponent="affine(2, 0.5, 0)", sequence=POLY, resolution=32, mask_resolution=64,
                indices=[4, 8, 16, 32])
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        cfg(kind="nope")
    with pytest.raises(ValueError):
        cfg(indices=[4, 4])
    with pytest.raises(ValueError):
        cfg(mask_resolution=48)
    path = tmp_path / "c.toml"
    path.write_text('kind = "indep"\nresolution = 16\nindices = [3, 5]\n[solver]\ntol = 1e-9\n')
    c = ExperimentConfig.from_toml(path)
    assert c.kind == "indep" and c.mask_resolution == 16 and c.solver_options.tol == 1e-9


def test_trend_rule():
    assert trend_decreases([4, 3, 2, 1, 0.5, 0.1])[0]
    assert not trend_decreases([1, 1, 1, 1, 0.9, 0.9])[0]
    # a non-monotone transient is tolerated
    assert trend_decreases([1, 3, 1, 0.2, 0.4, 0.1])[0]
    assert trend_decreases([2.0, 1.1, 1.05], floor=1.0)[0]


@given(st.lists(st.floats(0, 10), min_size=1, max_size=30))
def test_trend_rule_scale_invariant(vals):
    v = np.array(vals)
    assert trend_decreases(v)[0] == trend_decreases(3 * v)[0]


def test_sources():
    m = build_mesh(UNIT, 8)
    assert make_source("constant(0)", m).is_zero()
    s = make_source("sum(bump(0.5, 0.5, 0.2), dx(sines(1, 1)), dy(affine(1, 0, 0)))", m)
    assert s.f0 is not None and s.fvec is not None
    with pytest.raises(DescriptorError):
        make_source("noise(3)", m)


def test_table_csv_keyed_by_n():
    t = ConvergenceTable(["n", "a"])
    t.add(8, a=0.1)
    t.add(2, a=1 / 3)
    assert t.to_csv() == "n,a\n2,0.33333333333333331\n8,0.10000000000000001\n"
    with pytest.raises(ValueError):
        t.add(3)


def test_sverak_small_and_cross_module():
    c = cfg()
    t = run(c)
    assert t.passed, t.report()
    gen = make_generator(POLY, 64)
    for n in c.indices:
        assert t.rows[n]["dH"] == float(hausdorff_complementary_distance(gen.domain(n), gen.limit()))
        assert t.rows[n]["components"] == complement_components(gen.domain(n))


def test_constant_sequence_floor_is_zero():
    t = run(cfg(sequence="constant(disk(0.5, 0.5, 0.4))", indices=[1, 2, 3]))
    assert np.all(t.column("rho_grad_err") == 0) and np.all(t.column("lp_err") == 0)
    assert t.info["floor"] == 0.0 and t.passed


def test_component_budget():
    with pytest.raises(ComponentBudgetExceeded):
        run(cfg(sequence="perforated", exponent="constant(2)", resolution=64, mask_resolution=256,
                indices=[2, 3, 4], component_budget=3))


def test_determinism():
    c = cfg(indices=[4, 8])
    assert run(c).to_csv() == run(c).to_csv()


def test_capcond_small():
    t = run(cfg(kind="capcond", exponent="affine(1.5, 0.5, 0)",
                sequence="attached_bump(rect(0.25, 0.25, 0.75, 0.75), 0.2)", indices=[1, 2, 4, 8]))
    assert t.passed, t.report()
    caps = t.column("cap")
    assert caps[0] > caps[-1] >= 0


def test_capcond_constant_sequence_zero_columns():
    t = run(cfg(kind="capcond", sequence="constant(square(0.5, 0.5, 0.3))", indices=[1, 2]))
    assert t.assertions == {"zero_columns": True}


def test_cm_small_and_zero_source():
    c = cfg(kind="cm", exponent="constant(2)", resolution=64, mask_resolution=128, indices=[2, 3, 4])
    t = run(c)
    assert set(t.columns) >= {"dist_u_star", "dist_u_D"}
    assert t.rows[3]["holes"] == 4 and t.rows[3]["components"] == 5
    z = run(cfg(kind="cm", exponent="constant(2)", source="constant(0)", resolution=64, mask_resolution=128,
                indices=[2, 4]))
    assert z.passed and np.all(z.column("dist_u_star") == 0)
    with pytest.raises(PreconditionViolated):
        run(cfg(kind="cm", exponent="constant(3)", indices=[2]))


def test_independence_small():
    t = run(cfg(kind="indep", indices=[4, 8, 16, 32]))
    assert t.passed, t.report()
    assert len([c for c in t.columns if c.startswith("err_")]) == 4
    single = run(cfg(kind="indep", indices=[6]))
    assert single.passed and len(single.rows) == 1


def test_alpha_small_and_failure():
    t = run(cfg(kind="alpha", sequence="square_exhaustion(0.2, 0.1)", resolution=32, mask_resolution=128,
                indices=[1, 2, 4, 8], capacity_samples=2, capacity_resolution=128))
    assert t.passed, t.report()
    with pytest.raises(ConditionCheckFailed):
        run(cfg(kind="alpha", exponent="constant(1.5)", sequence="square_exhaustion(0.2, 0.1)", alpha=1e6,
                indices=[1], capacity_samples=1, capacity_resolution=128, mask_resolution=128))
    with pytest.raises(ResolutionTooCoarse):
        run(cfg(kind="alpha", sequence="square_exhaustion(0.2, 0.1)", indices=[1], capacity_samples=1))
