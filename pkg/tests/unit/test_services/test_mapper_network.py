"""Unit tests for the Mapper colour network"""

import itertools

import numpy as np
import pytest

from thor2.core.config import ColorspaceSettings, MapperSettings
from thor2.core.exceptions import ValidationException
from thor2.models.color import RgbColor
from thor2.models.network import ColorSamples, CoverSpec, NetworkEdge
from thor2.services.colorspace import hyab_rows, srgb_to_lab_array
from thor2.services.mapper_network import (
    RegionLookup,
    assign_weights,
    build_color_network,
    build_cover,
    build_nerve,
    close_hue_cycle,
    eliminate_redundant,
    grid_values,
    refine_pullback,
    region_membership,
    sample_srgb_cube,
)
from tests.fixtures.builders import make_region, network_from_regions


def lab_samples(lab: np.ndarray) -> ColorSamples:
    lab = np.asarray(lab, dtype=np.float64)
    return ColorSamples(
        rgb=np.zeros((len(lab), 3), dtype=np.uint8), lab=lab, grid=np.array([0, 255]), stride=255
    )


def single_cell(lens_points: np.ndarray):
    return build_cover(lens_points, CoverSpec(n_intervals_chroma=1, n_intervals_hue=1))


@pytest.mark.unit
class TestSampling:
    @pytest.mark.parametrize("stride, expected", [(256, 8), (128, 27), (8, 35_937)])
    def test_sample_counts(self, stride, expected):
        """Test grid sizes with endpoint clamping"""
        samples = sample_srgb_cube(stride)

        assert len(samples) == expected

    def test_grid_includes_extremes(self):
        """Test 0 and 255 are sampled"""
        samples = sample_srgb_cube(8)
        rgb = {tuple(int(v) for v in row) for row in samples.rgb}

        assert (0, 0, 0) in rgb
        assert (255, 255, 255) in rgb
        assert len(grid_values(8)) == 33

    def test_samples_pair_rgb_and_lab(self):
        """Test indexing yields the colour and its CIELAB image"""
        samples = sample_srgb_cube(128)

        rgb, k = samples[5]

        assert k.as_tuple() == pytest.approx(tuple(srgb_to_lab_array(np.array(rgb.as_tuple()))))

    @pytest.mark.parametrize("stride", [0, -8])
    def test_non_positive_stride_rejected(self, stride):
        """Test stride validation"""
        with pytest.raises(ValidationException):
            sample_srgb_cube(stride)


@pytest.mark.unit
class TestCover:
    def test_zero_gain_halves_range(self):
        """Test two intervals without overlap"""
        points = np.array([[0.0, 1.0], [10.0, 1.0]])

        cover = build_cover(points, CoverSpec(n_intervals_chroma=2, n_intervals_hue=1, gain_chroma=0))

        assert cover.chroma_intervals == [pytest.approx((0.0, 5.0)), pytest.approx((5.0, 10.0))]

    def test_half_gain(self):
        """Test 2r - 0.5r = 9 gives r = 6"""
        points = np.array([[0.0, 1.0], [9.0, 1.0]])

        cover = build_cover(points, CoverSpec(n_intervals_chroma=2, n_intervals_hue=1, gain_chroma=50))

        assert cover.r1 == pytest.approx(6.0)
        assert cover.chroma_intervals == [pytest.approx((0.0, 6.0)), pytest.approx((3.0, 9.0))]

    def test_degenerate_dimension_single_interval(self):
        """Test a constant lens dimension collapses to one interval"""
        points = np.array([[0.0, 2.0], [4.0, 2.0]])

        cover = build_cover(points, CoverSpec())

        assert cover.hue_intervals == [(2.0, 2.0)]
        assert len(cover.cells) == 3

    def test_default_cover_on_lens_image(self):
        """Test 3 x 8 cells, coverage and measured overlap"""
        # Arrange
        from thor2.services.colorspace import lens_array

        samples = sample_srgb_cube(32)
        points = lens_array(samples.lab)

        # Act
        cover = build_cover(points, CoverSpec())

        # Assert
        assert len(cover.cells) == 24
        hits = np.sum([cell.contains(points) for cell in cover.cells], axis=0)
        assert hits.min() >= 1
        for intervals, r, gain in [
            (cover.chroma_intervals, cover.r1, 0.10),
            (cover.hue_intervals, cover.r2, 0.25),
        ]:
            for (_, end), (start, _) in zip(intervals, intervals[1:]):
                assert (end - start) / r == pytest.approx(gain, abs=1e-6)
        assert cover.hue_intervals[0][0] == points[:, 1].min()
        assert cover.hue_intervals[-1][1] == points[:, 1].max()

    def test_empty_lens_rejected(self):
        """Test at least one point is required"""
        with pytest.raises(ValidationException):
            build_cover(np.empty((0, 2)), CoverSpec())


@pytest.mark.unit
class TestRefinePullback:
    def test_two_separated_blobs(self):
        """Test DBSCAN splits blobs further apart than eps"""
        # Arrange
        L = 50 + 0.5 * np.arange(6)
        blob_a = np.column_stack([L, np.zeros(6), np.zeros(6)])
        blob_b = np.column_stack([L, np.full(6, 40.0), np.zeros(6)])
        samples = lab_samples(np.vstack([blob_a, blob_b]))
        points = np.column_stack([np.zeros(12), np.ones(12)])

        # Act
        regions = refine_pullback(samples, points, single_cell(points), dbscan_eps=5.0, dbscan_min_pts=3)

        # Assert
        assert [r.members for r in regions] == [tuple(range(6)), tuple(range(6, 12))]
        assert regions[1].mean_color.a_star == pytest.approx(40.0, abs=1e-9)

    def test_huge_eps_merges_cell(self):
        """Test one region per non-empty cell when everything is reachable"""
        rng = np.random.default_rng(0)
        samples = lab_samples(rng.uniform(0, 100, (30, 3)))
        points = np.column_stack([np.zeros(30), np.ones(30)])

        regions = refine_pullback(samples, points, single_cell(points), dbscan_eps=1e6, dbscan_min_pts=1)

        assert len(regions) == 1
        assert regions[0].members == tuple(range(30))

    def test_noise_is_dropped(self):
        """Test isolated samples belong to no region"""
        lab = np.array([[50, 0, 0], [50.5, 0, 0], [51, 0, 0], [90, 60, 60]], dtype=float)
        samples = lab_samples(lab)
        points = np.column_stack([np.zeros(4), np.ones(4)])

        regions = refine_pullback(samples, points, single_cell(points), dbscan_eps=2.0, dbscan_min_pts=2)

        assert [r.members for r in regions] == [(0, 1, 2)]

    def test_mean_colour_is_member_mean(self):
        """Test the region mean in CIELAB"""
        rng = np.random.default_rng(3)
        lab = rng.uniform(40, 41, (10, 3))
        samples = lab_samples(lab)
        points = np.column_stack([np.zeros(10), np.ones(10)])

        (region,) = refine_pullback(samples, points, single_cell(points), dbscan_eps=10.0, dbscan_min_pts=1)

        assert region.mean_color.as_tuple() == pytest.approx(tuple(lab.mean(axis=0)), abs=1e-9)

    def test_invalid_parameters(self):
        """Test eps and min_pts preconditions"""
        samples = lab_samples(np.zeros((1, 3)))
        points = np.zeros((1, 2))

        with pytest.raises(ValidationException):
            refine_pullback(samples, points, single_cell(points), dbscan_eps=0.0, dbscan_min_pts=1)


@pytest.mark.unit
class TestNerve:
    def test_disjoint_regions(self):
        """Test no shared samples, no edge"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [2, 3])])

        assert network.n_c == 2
        assert network.edges == ()

    def test_shared_member(self):
        """Test {a,b} and {b,c} are adjacent"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [1, 2])])

        assert network.edge_keys() == {(0, 1)}

    def test_triple_overlap_gives_triangle(self):
        """Test a common sample produces the 3-clique"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [0, 2]), make_region(2, [0, 3])])

        assert network.edge_keys() == {(0, 1), (0, 2), (1, 2)}


@pytest.mark.unit
class TestCloseHueCycle:
    @pytest.fixture
    def eight_hue_cover(self):
        points = np.array([[0.0, 0.0], [1.0, 8.0]])
        return build_cover(points, CoverSpec(n_intervals_chroma=1, n_intervals_hue=8))

    def test_seam_edge_added(self, eight_hue_cover):
        """Test first and last hue intervals are joined"""
        regions = [make_region(k, [k], cell=(0, k)) for k in range(8)]
        network = build_nerve(regions)

        closed = close_hue_cycle(network, eight_hue_cover)

        assert closed.edge_keys() == {(0, 7)}
        assert closed.edges[0].cyclic is True

    def test_single_hue_interval_is_noop(self):
        """Test no seam without a second interval"""
        cover = build_cover(np.array([[0.0, 0.0], [1.0, 8.0]]), CoverSpec(n_intervals_chroma=1, n_intervals_hue=1))
        network = build_nerve([make_region(0, [0], cell=(0, 0))])

        assert close_hue_cycle(network, cover) == network

    def test_existing_overlap_not_duplicated(self, eight_hue_cover):
        """Test edge set semantics across the seam"""
        network = build_nerve([make_region(0, [0, 1], cell=(0, 0)), make_region(1, [1, 2], cell=(0, 7))])

        closed = close_hue_cycle(network, eight_hue_cover)

        assert len(closed.edges) == 1
        assert closed.edges[0].cyclic is False

    def test_only_same_chroma_band(self):
        """Test regions in different chroma bands are not joined"""
        cover = build_cover(np.array([[0.0, 0.0], [3.0, 8.0]]), CoverSpec(n_intervals_chroma=3, n_intervals_hue=8))
        network = build_nerve([make_region(0, [0], cell=(0, 0)), make_region(1, [1], cell=(1, 7))])

        assert close_hue_cycle(network, cover).edges == ()


@pytest.mark.unit
class TestEliminateRedundant:
    def test_duplicate_keeps_lowest_id(self):
        """Test identical member sets collapse"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [0, 1])])

        result = eliminate_redundant(network)

        assert result.n_c == 1
        assert result.regions[0].members == (0, 1)
        assert result.edges == ()

    def test_subset_rewires_cyclic_edges(self):
        """Test a subset region hands its seam edge to its superset"""
        # Arrange
        regions = [
            make_region(0, [0, 1, 2]),
            make_region(1, [0, 1]),
            make_region(2, [5, 6], cell=(0, 7)),
        ]
        network = network_from_regions(
            regions,
            [NetworkEdge(source=0, target=1), NetworkEdge(source=1, target=2, cyclic=True)],
        )

        # Act
        result = eliminate_redundant(network)

        # Assert
        assert [r.members for r in result.regions] == [(0, 1, 2), (5, 6)]
        assert [r.id for r in result.regions] == [0, 1]
        assert result.edge_keys() == {(0, 1)}
        assert result.edges[0].cyclic is True

    def test_no_subsets_unchanged(self):
        """Test identity case"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [1, 2])])

        assert eliminate_redundant(network) is network


@pytest.mark.unit
class TestAssignWeights:
    def test_hyab_weight(self):
        """Test edge weight equals HyAB of the means"""
        network = build_nerve(
            [make_region(0, [0, 1], mean=(50, 3, 4)), make_region(1, [1, 2], mean=(47, 0, 0))]
        )

        weighted = assign_weights(network)

        assert weighted.edges[0].weight == 8.0

    def test_identical_means_zero_weight(self):
        """Test zero-distance means"""
        network = build_nerve([make_region(0, [0, 1]), make_region(1, [1, 2])])

        assert assign_weights(network).edges[0].weight == 0.0


@pytest.mark.unit
class TestBuildColorNetwork:
    @pytest.fixture(scope="class")
    def built(self):
        mapper = MapperSettings(stride=37, dbscan_eps=15.0, dbscan_min_pts=2)
        return build_color_network(mapper, ColorspaceSettings())

    def test_nerve_soundness(self, built):
        """Test every non-cyclic edge has a shared sample and every non-edge has none"""
        network, samples = built
        assert len(samples) == 512
        members = [set(r.members) for r in network.regions]
        edges = {e.key: e for e in network.edges}

        for i, j in itertools.combinations(range(network.n_c), 2):
            shared = bool(members[i] & members[j])
            edge = edges.get((i, j))
            if edge is None:
                assert not shared
            else:
                assert shared != edge.cyclic

    def test_no_redundant_regions(self, built):
        """Test no member set contains another"""
        network, _ = built
        members = [frozenset(r.members) for r in network.regions]

        for i, j in itertools.permutations(range(len(members)), 2):
            assert not members[i] <= members[j]

    def test_weights_and_ids(self, built):
        """Test compact ids and HyAB weights"""
        network, _ = built
        from thor2.services.colorspace import hyab

        assert [r.id for r in network.regions] == list(range(network.n_c))
        for e in network.edges:
            expected = hyab(network.regions[e.source].mean_color, network.regions[e.target].mean_color)
            assert e.weight == pytest.approx(expected, abs=1e-9)

    def test_cyclic_edges_present(self, built):
        """Test the hue seam is closed"""
        network, _ = built

        assert any(e.cyclic for e in network.edges)

    def test_deterministic(self, built):
        """Test a rebuild gives the same digest"""
        network, _ = built
        again, _ = build_color_network(
            MapperSettings(stride=37, dbscan_eps=15.0, dbscan_min_pts=2), ColorspaceSettings()
        )

        assert again.digest() == network.digest()
        assert again.config_hash == network.config_hash


@pytest.mark.slow
class TestDefaultNetwork:
    def test_pinned_shape(self):
        """Test the stride-8 default network keeps its region and edge counts"""
        network, samples = build_color_network(MapperSettings(), ColorspaceSettings())

        assert len(samples) == 35_937
        assert network.n_c == 21
        assert len(network.edges) == 52
        assert sum(e.cyclic for e in network.edges) == 3
        assert [r.id for r in network.regions] == list(range(21))


@pytest.mark.unit
class TestRegionLookup:
    def test_on_grid_colour(self, toy_network, toy_lookup):
        """Test a grid colour inherits its sample's regions"""
        network, samples = toy_network
        index = 7
        expected = {r.id for r in network.regions if index in r.members}
        rgb = RgbColor(**dict(zip("rgb", (int(v) for v in samples.rgb[index]))))

        assert region_membership(rgb, toy_lookup) == expected

    def test_off_grid_matches_brute_force(self, toy_network, toy_lookup):
        """Test nearest sample in HyAB with lowest-index ties"""
        network, samples = toy_network
        rng = np.random.default_rng(5)

        for rgb in rng.integers(0, 256, size=(50, 3)):
            lab = srgb_to_lab_array(rgb)
            nearest = int(np.argmin(hyab_rows(samples.lab, lab[None, :])))
            expected = tuple(sorted(r.id for r in network.regions if nearest in r.members))

            assert toy_lookup.membership(tuple(int(v) for v in rgb)) == expected

    def test_many_matches_single(self, toy_lookup):
        """Test the vectorised form"""
        colors = np.array([[255, 0, 0], [1, 2, 3], [255, 0, 0], [0, 0, 255]])

        result = toy_lookup.membership_many(colors)

        assert result == [toy_lookup.membership(tuple(c)) for c in colors.tolist()]
