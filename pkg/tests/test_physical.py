import pytest

from scnplan.errors import ModulationReachError, ScnPlanError
from scnplan.physical import (
    DEFAULT_MODULATIONS,
    GridParams,
    ModulationEntry,
    ModulationTable,
    default_physics,
    fs_required,
    highest_feasible_modulation,
    load_physics,
    ocs_required,
    simplified_physics,
    supportable_traffic,
)


class TestModulationSelection:
    @pytest.mark.parametrize("length,expected", [
        (500, "DP-16QAM"),
        (600, "DP-16QAM"),   # reach boundary is inclusive
        (601, "DP-8QAM"),
        (1200, "DP-8QAM"),
        (1201, "DP-QPSK"),
        (3500, "DP-QPSK"),
        (3501, "DP-BPSK"),
        (6300, "DP-BPSK"),
    ])
    def test_selection_by_reach(self, length, expected):
        assert highest_feasible_modulation(DEFAULT_MODULATIONS, length).name == expected

    def test_beyond_max_reach(self):
        with pytest.raises(ModulationReachError):
            highest_feasible_modulation(DEFAULT_MODULATIONS, 7000)

    def test_table_ordering_enforced(self):
        with pytest.raises(ScnPlanError):
            ModulationTable((
                ModulationEntry("a", 100, 1000.0),
                ModulationEntry("b", 100, 500.0),
            ))
        with pytest.raises(ScnPlanError):
            ModulationTable((
                ModulationEntry("a", 100, 500.0),
                ModulationEntry("b", 200, 1000.0),
            ))


class TestCarrierArithmetic:
    def test_ocs_required_examples(self):
        assert ocs_required(10000, 100) == 100
        assert ocs_required(10000, 200) == 50
        assert ocs_required(1000, 150) == 7

    def test_ocs_never_underprovision(self):
        for t in range(0, 2500, 37):
            for rate in (50, 100, 150, 200):
                assert ocs_required(t, rate) * rate >= t

    def test_fs_required_examples(self):
        grid = GridParams()
        assert fs_required(grid, 1) == 3
        assert fs_required(grid, 0) == 0
        assert fs_required(grid, 106) == 318

    def test_grid_invariants(self):
        grid = GridParams()
        assert grid.f_max == 319
        assert grid.ocs_per_lane == 106
        with pytest.raises(ScnPlanError):
            GridParams(fs_max=0)


class TestSupportableTraffic:
    def test_full_lane_qpsk(self):
        physics = default_physics()
        assert supportable_traffic(physics, 3000, 320) == 10600

    def test_below_one_carrier(self):
        physics = default_physics()
        assert supportable_traffic(physics, 3000, 2) == 0

    def test_simplified_full_lane(self):
        physics = simplified_physics()
        assert supportable_traffic(physics, 99999, 320) == 8000

    def test_monotone_and_stepwise(self):
        physics = default_physics()
        previous = -1
        for fs in range(0, 330):
            value = supportable_traffic(physics, 700, fs)
            assert value >= previous
            if fs % physics.grid.fs_per_oc:
                assert value == supportable_traffic(physics, 700, fs - fs % 3)
            previous = value

    def test_demand_fits_lane_when_supportable(self):
        physics = default_physics()
        grid = physics.grid
        for length in (500, 2000, 5000):
            ceiling = supportable_traffic(physics, length, grid.fs_max)
            rate = highest_feasible_modulation(physics.modulations, length).gbps_per_oc
            for t in range(0, ceiling + 1, 97):
                assert fs_required(grid, ocs_required(t, rate)) <= grid.fs_max


class TestPhysicsConfig:
    def test_defaults_match_reference_values(self):
        physics = default_physics()
        names = [(m.name, m.gbps_per_oc, m.reach_km) for m in physics.modulations.entries]
        assert names == [
            ("DP-BPSK", 50, 6300.0),
            ("DP-QPSK", 100, 3500.0),
            ("DP-8QAM", 150, 1200.0),
            ("DP-16QAM", 200, 600.0),
        ]
        assert physics.grid == GridParams(320, 3, 1, 12.5)

    def test_load_physics_overrides(self):
        doc = {
            "modulations": [{"name": "x", "gbps_per_oc": 10, "reach_km": 100}],
            "grid": {"fs_max": 40, "fs_per_oc": 2},
        }
        physics = load_physics(doc)
        assert physics.grid.fs_max == 40
        assert physics.modulations.entries[0].name == "x"
