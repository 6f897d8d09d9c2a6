import math

import numpy as np
import pytest

from skylane import kernels
from skylane.chanmap import lattice_points
from skylane.ilp import _compile

from test_ilp import random_model

try:
    from skylane import _corekern
except ImportError:
    _corekern = None
from skylane import _purekern

BACKENDS = [_purekern] + ([_corekern] if _corekern is not None else [])
needs_both = pytest.mark.skipif(
    _corekern is None, reason="compiled backend not built"
)


def slab_oracle(origin, target, box):
    """Scalar slab test for one segment and one box (independent rewrite)."""
    tmin, tmax = -math.inf, math.inf
    for ax in range(3):
        lo, hi = box[ax], box[3 + ax]
        o = origin[ax]
        da = target[ax] - origin[ax]
        if da == 0.0:
            if o < lo or o > hi:
                return False, 0
            continue
        t1 = (lo - o) / da
        t2 = (hi - o) / da
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
    if tmin > tmax:
        return False, 0
    blocked = tmax >= 0.0 and tmin <= 1.0
    walls = int(0.0 < tmin < 1.0) + int(0.0 < tmax < 1.0)
    return blocked, walls


def walls_oracle(origin, targets, boxes):
    blocked = np.zeros(len(targets), dtype=np.uint8)
    walls = np.zeros(len(targets), dtype=np.int32)
    for p, tgt in enumerate(targets):
        for box in boxes:
            b, w = slab_oracle(origin, tgt, box)
            blocked[p] |= np.uint8(b)
            walls[p] += w
    return blocked, walls


def random_geometry(rng: np.random.Generator):
    boxes = []
    for _ in range(int(rng.integers(1, 7))):
        x0, y0 = rng.uniform(0.0, 80.0, size=2)
        z0 = 0.0
        boxes.append(
            [
                x0,
                y0,
                z0,
                x0 + rng.uniform(2.0, 25.0),
                y0 + rng.uniform(2.0, 25.0),
                z0 + rng.uniform(5.0, 50.0),
            ]
        )
    boxes = np.array(boxes)
    origin = np.array([rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 60)])
    pts = rng.uniform(0.0, 100.0, size=(40, 3))
    # snap a few coordinates onto box faces to probe the touching rule
    for t in range(0, 40, 5):
        b = int(rng.integers(len(boxes)))
        ax = int(rng.integers(3))
        pts[t, ax] = boxes[b, ax + (3 if rng.random() < 0.5 else 0)]
    return origin, pts, boxes


class TestBackendSelection:
    def test_name_is_known(self):
        assert kernels.backend_name() in ("pure", "compiled")

    def test_constants_agree(self):
        for mod in BACKENDS:
            assert mod.FEAS_TOL == kernels.FEAS_TOL
            assert (mod.STATUS_OPTIMAL, mod.STATUS_INFEASIBLE, mod.STATUS_BUDGET) == (
                kernels.STATUS_OPTIMAL,
                kernels.STATUS_INFEASIBLE,
                kernels.STATUS_BUDGET,
            )


class TestSegmentWalls:
    @pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__)
    def test_matches_scalar_oracle(self, backend):
        rng = np.random.default_rng(17)
        for _ in range(30):
            origin, pts, boxes = random_geometry(rng)
            blocked, walls = backend.segment_walls(origin, pts, boxes)
            want_b, want_w = walls_oracle(origin, pts, boxes)
            assert np.array_equal(blocked, want_b)
            assert np.array_equal(walls, want_w)

    @pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__)
    def test_axis_parallel_and_degenerate(self, backend):
        box = np.array([[10.0, 10.0, 0.0, 20.0, 20.0, 30.0]])
        origin = np.array([15.0, 5.0, 10.0])
        pts = np.array(
            [
                [15.0, 25.0, 10.0],  # straight through, two walls
                [15.0, 10.0, 10.0],  # stops exactly on the near face
                [15.0, 5.0, 10.0],   # zero-length, outside
                [15.0, 8.0, 10.0],   # stops short
                [5.0, 5.0, 10.0],    # parallel miss
            ]
        )
        blocked, walls = backend.segment_walls(origin, pts, box)
        assert blocked.tolist() == [1, 1, 0, 0, 0]
        assert walls.tolist() == [2, 0, 0, 0, 0]
        want_b, want_w = walls_oracle(origin, pts, box)
        assert np.array_equal(blocked, want_b)
        assert np.array_equal(walls, want_w)

    @pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__)
    def test_zero_length_inside(self, backend):
        box = np.array([[0.0, 0.0, 0.0, 10.0, 10.0, 10.0]])
        origin = np.array([5.0, 5.0, 5.0])
        blocked, walls = backend.segment_walls(origin, origin.reshape(1, 3), box)
        assert blocked.tolist() == [1]
        assert walls.tolist() == [0]

    @pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__)
    def test_no_boxes(self, backend):
        blocked, walls = backend.segment_walls(
            np.zeros(3), np.ones((4, 3)), np.zeros((0, 6))
        )
        assert blocked.tolist() == [0, 0, 0, 0]
        assert walls.tolist() == [0, 0, 0, 0]

    @needs_both
    def test_backends_bit_identical_on_scene(self, tiny_instance):
        inst = tiny_instance
        pts = lattice_points(inst.grid, inst.lattice)
        boxes = inst.scene.boxes()
        for site in inst.scene.sites:
            origin = np.asarray(site)
            b_pure, w_pure = _purekern.segment_walls(origin, pts, boxes)
            b_comp, w_comp = _corekern.segment_walls(origin, pts, boxes)
            assert np.array_equal(b_pure, b_comp)
            assert np.array_equal(w_pure, w_comp)

    @needs_both
    def test_backends_bit_identical_random(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            origin, pts, boxes = random_geometry(rng)
            b_pure, w_pure = _purekern.segment_walls(origin, pts, boxes)
            b_comp, w_comp = _corekern.segment_walls(origin, pts, boxes)
            assert np.array_equal(b_pure, b_comp)
            assert np.array_equal(w_pure, w_comp)


@needs_both
class TestSearchIdentity:
    def run_both(self, model, budget=10_000_000, disable=False):
        arrays = _compile(model)
        out = []
        for mod in (_purekern, _corekern):
            code, values, nodes = mod.bnb_search(
                *arrays, np.int64(budget), bool(disable)
            )
            out.append((int(code), None if values is None else np.asarray(values), int(nodes)))
        return out

    def assert_same(self, a, b):
        assert a[0] == b[0]
        assert a[2] == b[2]
        if a[1] is None or b[1] is None:
            assert a[1] is None and b[1] is None
        else:
            assert np.array_equal(a[1], b[1])

    def test_full_search_traces(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            pure, compiled = self.run_both(random_model(rng))
            self.assert_same(pure, compiled)

    def test_pruning_disabled_traces(self):
        rng = np.random.default_rng(32)
        for _ in range(15):
            pure, compiled = self.run_both(random_model(rng, n=8), disable=True)
            self.assert_same(pure, compiled)

    def test_budget_truncation_traces(self):
        rng = np.random.default_rng(33)
        for budget in (1, 2, 5, 17):
            pure, compiled = self.run_both(random_model(rng, n=10), budget=budget)
            self.assert_same(pure, compiled)
