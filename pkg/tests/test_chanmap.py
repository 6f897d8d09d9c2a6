import numpy as np
import pytest

from skylane.chanmap import (
    ChannelMap,
    CkmFormatError,
    SampleLattice,
    build_channel_map,
    cell_stats,
    coarse_stats,
    fine_stats,
    lattice_axes,
    lattice_points,
    reduce_stats,
)
from skylane.grid import Cell, GridSpec
from skylane.metrics import RadioParams
from skylane.scene import GainModel, Scene, point_gain

from conftest import build_instance, cached_instance


class TestLattice:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampleLattice(samples_per_edge=1, vertical_samples=2)
        with pytest.raises(ValueError):
            SampleLattice(samples_per_edge=2, vertical_samples=1)

    def test_axes(self):
        g = GridSpec(10.0, 20.0, 100.0, 4, 8.0, 8.0, 6.0)
        lat = SampleLattice(samples_per_edge=2, vertical_samples=3)
        xs, ys, zs = lattice_axes(g, lat)
        assert xs.shape == (8,) and ys.shape == (8,)
        assert xs[0] == 10.0 and xs[1] == 14.0 and xs[-1] == 38.0
        assert ys[0] == 20.0
        assert np.allclose(zs, [100.0, 103.0, 106.0])

    def test_points_order(self):
        g = GridSpec(0.0, 0.0, 50.0, 2, 10.0, 10.0, 4.0)
        lat = SampleLattice(samples_per_edge=2, vertical_samples=2)
        pts = lattice_points(g, lat)
        assert pts.shape == (4 * 4 * 2, 3)
        assert pts[0].tolist() == [0.0, 0.0, 50.0]
        assert pts[1].tolist() == [0.0, 0.0, 54.0]  # z fastest
        assert pts[2].tolist() == [0.0, 5.0, 50.0]  # then y


class TestChannelMap:
    def test_gains_match_point_model(self, tiny_instance):
        inst = tiny_instance
        cmap = inst.maps[2]
        xs, ys, zs = lattice_axes(inst.grid, inst.lattice)
        site = inst.scene.sites[2]
        rng = np.random.default_rng(0)
        for _ in range(25):
            ix = int(rng.integers(xs.size))
            iy = int(rng.integers(ys.size))
            iz = int(rng.integers(zs.size))
            p = (xs[ix], ys[iy], zs[iz])
            assert cmap.gains[ix, iy, iz] == point_gain(site, p, inst.scene, inst.gain)
            assert cmap.gain_at(p) == cmap.gains[ix, iy, iz]

    def test_lookup_nearest_and_bounds(self, tiny_instance):
        cmap = tiny_instance.maps[0]
        xs, ys, zs = lattice_axes(tiny_instance.grid, tiny_instance.lattice)
        p = (xs[3] + 0.2, ys[5] - 0.3, zs[1] + 0.1)
        assert cmap.gain_at(p) == cmap.gains[3, 5, 1]
        assert cmap.los_at(p) == bool(cmap.los[3, 5, 1])
        with pytest.raises(ValueError):
            cmap.gain_at((xs[-1] + 50.0, ys[0], zs[0]))

    def test_site_on_sample_rejected(self):
        scene = Scene(
            bounds=(0.0, 0.0, 40.0, 40.0),
            buildings=(),
            sites=((10.0, 10.0, 10.0),),
            seed=0,
        )
        grid = GridSpec(0.0, 0.0, 10.0, 2, 20.0, 20.0, 4.0)
        lat = SampleLattice(samples_per_edge=2, vertical_samples=2)
        with pytest.raises(ValueError, match="coincides"):
            build_channel_map(0, scene, grid, lat, GainModel(wavelength=0.3))


class TestCkmFile:
    def test_roundtrip_bit_exact(self, tiny_instance, tmp_path):
        cmap = tiny_instance.maps[1]
        path = tmp_path / "m.ckm"
        cmap.save(path)
        again = ChannelMap.load(path)
        assert again.site_index == cmap.site_index
        assert again.origin == cmap.origin and again.step == cmap.step
        assert again.gains.tobytes() == cmap.gains.tobytes()
        assert np.array_equal(again.los, cmap.los)

    def test_save_deterministic(self, tiny_instance, tmp_path):
        cmap = tiny_instance.maps[1]
        a, b = tmp_path / "a.ckm", tmp_path / "b.ckm"
        cmap.save(a)
        cmap.save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic(self, tiny_instance, tmp_path):
        path = tmp_path / "m.ckm"
        tiny_instance.maps[0].save(path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XKM1"
        path.write_bytes(raw)
        with pytest.raises(CkmFormatError, match="CKM1"):
            ChannelMap.load(path)

    def test_truncated(self, tiny_instance, tmp_path):
        path = tmp_path / "m.ckm"
        tiny_instance.maps[0].save(path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 7])
        with pytest.raises(CkmFormatError):
            ChannelMap.load(path)

    def test_trailing_garbage(self, tiny_instance, tmp_path):
        path = tmp_path / "m.ckm"
        tiny_instance.maps[0].save(path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(CkmFormatError):
            ChannelMap.load(path)


class TestReduction:
    def test_reduce_matches_cell_stats_fine(self, tiny_instance):
        inst = tiny_instance
        grid = inst.grid
        for k in range(3):
            for cell in (Cell(1, 1), Cell(3, 5), Cell(8, 8), Cell(5, 2)):
                ref = cell_stats(
                    inst.maps[k], inst.scene, grid, cell, inst.radio,
                    trim_fraction=0.0, los_rule="all",
                )
                got = inst.fine_stats.stats(k, cell)
                assert got == ref

    def test_reduce_matches_cell_stats_coarse(self, tiny_instance):
        inst = tiny_instance
        m = inst.coarse.m
        coarse_grid = GridSpec(
            origin_x=inst.grid.origin_x,
            origin_y=inst.grid.origin_y,
            altitude=inst.grid.altitude,
            n=m,
            dx=inst.coarse.coarse_dx,
            dy=inst.coarse.coarse_dy,
            dz=inst.grid.dz,
        )
        for k in range(len(inst.maps)):
            for a in range(1, m + 1):
                for b in range(1, m + 1):
                    ref = cell_stats(
                        inst.maps[k], inst.scene, coarse_grid, Cell(a, b),
                        inst.radio, trim_fraction=0.10, los_rule="all",
                    )
                    assert inst.coarse_stats.stats(k, Cell(a, b)) == ref

    def test_trim_against_plain_python(self, tiny_instance):
        inst = tiny_instance
        cmap = inst.maps[0]
        s = inst.lattice.samples_per_edge
        nz = inst.lattice.vertical_samples
        cell = Cell(4, 6)
        block = cmap.gains[(cell.j - 1) * s : cell.j * s, (cell.i - 1) * s : cell.i * s, :]
        samples = sorted(float(v) for v in block.reshape(-1))
        count = s * s * nz
        t = int(0.25 * count)
        ref = cell_stats(
            cmap, inst.scene, inst.grid, cell, inst.radio, trim_fraction=0.25
        )
        assert ref.h_min == samples[0] and ref.h_max == samples[-1]
        assert ref.h_min_trim == samples[t] and ref.h_max_trim == samples[count - 1 - t]

    def test_stat_ordering_invariants(self, tiny_instance):
        for st in (tiny_instance.fine_stats, tiny_instance.coarse_stats):
            assert (st.h_min_raw <= st.h_min).all()
            assert (st.h_min <= st.h_max).all()
            assert (st.h_max <= st.h_max_raw).all()
            assert (st.echo >= 0.0).all()
            assert ((st.echo > 0.0) == st.los).all()

    def test_los_rules_differ_on_mixed_cell(self):
        inst = cached_instance("tiny", 3, buildings=8, heights=(30.0, 39.0))
        st_all = reduce_stats(
            inst.maps, inst.scene, inst.grid, inst.radio, inst.grid.n, 0.0, "all"
        )
        st_any = reduce_stats(
            inst.maps, inst.scene, inst.grid, inst.radio, inst.grid.n, 0.0, "any"
        )
        assert (st_any.los >= st_all.los).all()
        mixed = st_any.los & ~st_all.los
        assert mixed.any()
        assert (st_any.echo[mixed] > 0.0).all()
        assert (st_all.echo[mixed] == 0.0).all()

    def test_echo_decays_along_a_row(self):
        # open scene, site near the (1,1) corner: distance grows with j
        scene = Scene(
            bounds=(0.0, 0.0, 80.0, 80.0),
            buildings=(),
            sites=((5.0, 5.0, 10.0),),
            seed=0,
        )
        grid = GridSpec(0.0, 0.0, 40.0, 8, 10.0, 10.0, 8.0)
        lat = SampleLattice(samples_per_edge=2, vertical_samples=2)
        radio = RadioParams.from_db()
        cmap = build_channel_map(0, scene, grid, lat, GainModel(wavelength=radio.wavelength))
        st = reduce_stats([cmap], scene, grid, radio, grid.n)
        row = st.echo[0, 0, :]
        assert (np.diff(row) < 0.0).all()
        assert bool(st.los.all())

    def test_misordered_maps_rejected(self, tiny_instance):
        inst = tiny_instance
        maps = list(inst.maps)
        maps[0], maps[1] = maps[1], maps[0]
        with pytest.raises(ValueError, match="site_index"):
            fine_stats(maps, inst.scene, inst.grid, inst.radio)

    def test_bad_side_rejected(self, tiny_instance):
        inst = tiny_instance
        with pytest.raises(ValueError, match="tile"):
            reduce_stats(inst.maps, inst.scene, inst.grid, inst.radio, side=5)

    def test_coarse_requires_matching_spec(self, tiny_instance):
        inst = tiny_instance
        from skylane.grid import CoarseSpec

        other = CoarseSpec(m=3, factor=2, coarse_dx=1.0, coarse_dy=1.0)
        with pytest.raises(ValueError, match="does not match"):
            coarse_stats(inst.maps, inst.scene, inst.grid, other, inst.radio)
