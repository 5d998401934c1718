#include "support.hpp"

#include <gtest/gtest.h>

using namespace crackfem;
using namespace testing_support;

TEST(SampleCurve, StraightSegment) {
    const auto pts = sample_curve(LineCurve{Point(0, 0), Point(1, 0)}, 0.25);
    ASSERT_EQ(pts.size(), 5u);
    for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_NEAR((pts[k] - pts[k - 1]).norm(), 0.25, 1e-15);
    EXPECT_EQ(pts.front(), Point(0, 0));
    EXPECT_EQ(pts.back(), Point(1, 0));
}

TEST(SampleCurve, ClosedCircle) {
    const CircleCurve c{Point(1, 2), 0.5, 0.3};
    const auto pts = sample_curve(c, curve_length(c) / 4.0);
    ASSERT_EQ(pts.size(), 5u);
    EXPECT_EQ(pts.front(), pts.back());
}

TEST(SampleCurve, ArcSagittaBound) {
    const double h = radial_side() / 16.0;
    const double spacing = h / 10.0;
    const auto cfg = radial_preset(false);
    const Curve& arc = cfg.crack.chains[0].curve;
    const auto pts = sample_curve(arc, spacing);
    const double e = std::numbers::e;
    EXPECT_NEAR((pts.front() - cfg.crack.nodes[0]).norm(), 0.0, 1e-14);
    EXPECT_NEAR((pts.back() - cfg.crack.nodes[1]).norm(), 0.0, 1e-14);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        EXPECT_LE((pts[k] - pts[k - 1]).norm(), spacing * (1 + 1e-12));
        EXPECT_NEAR(pts[k].norm(), e, 1e-14);
        // Deviation of the chord from the arc at 64 interior points.
        for (int i = 1; i < 64; ++i) {
            const Point x = pts[k - 1] + (i / 64.0) * (pts[k] - pts[k - 1]);
            EXPECT_LE(e - x.norm(), spacing * spacing / (8.0 * e) * (1 + 1e-9));
        }
    }
}

TEST(SampleCurve, ArcThroughMatchesArc) {
    const ArcThroughCurve c{Point(1, 0), Point(0, 1), Point(-1, 0)};
    EXPECT_NEAR(curve_length(c), std::numbers::pi, 1e-14);
    for (const auto& p : sample_curve(c, 0.1)) EXPECT_NEAR(p.norm(), 1.0, 1e-14);
}

TEST(SampleCurve, RejectsNonPositiveSpacing) {
    EXPECT_THROW(sample_curve(LineCurve{Point(0, 0), Point(1, 0)}, 0.0), InvalidArgument);
    EXPECT_THROW(sample_curve(LineCurve{Point(0, 0), Point(1, 0)}, -1.0), InvalidArgument);
}

TEST(CrackGraph, IncidenceMapsAreConsistent) {
    const auto cfg = crack_network_preset(false);
    const CrackGraph g = build_crack(cfg, 0.5, 1e-12);
    for (std::size_t j = 0; j < g.chains().size(); ++j)
        for (int i : g.chain_nodes(j)) {
            const auto& inc = g.incident_chains(static_cast<std::size_t>(i));
            EXPECT_NE(std::find(inc.begin(), inc.end(), static_cast<int>(j)), inc.end());
        }
    for (std::size_t i = 0; i < g.nodes().size(); ++i)
        for (int j : g.incident_chains(i)) {
            const auto& n = g.chain_nodes(static_cast<std::size_t>(j));
            EXPECT_TRUE(n[0] == static_cast<int>(i) || n[1] == static_cast<int>(i));
        }
    EXPECT_EQ(g.incident_chains(1).size(), 3u);
    EXPECT_EQ(g.incident_chains(4).size(), 3u);
    EXPECT_EQ(g.incident_chains(0).size(), 1u);
}

TEST(CrackGraph, RejectsInvalidChains) {
    const auto f = constant_function(0.0);
    EXPECT_THROW(CrackGraph({Point(0, 0), Point(1, 0)}, {Chain{{Point(0, 0)}, {0, 1}, 1.0, f}}, 1e-12), GeometryError);
    EXPECT_THROW(CrackGraph({Point(0, 0), Point(1, 0)},
                            {Chain{{Point(0, 0), Point(0.5, 0), Point(0.5, 0), Point(1, 0)}, {0, 1}, 1.0, f}}, 1e-12),
                 GeometryError);
    EXPECT_THROW(CrackGraph({Point(0, 0), Point(1, 0)}, {Chain{{Point(0, 0), Point(1, 0.1)}, {0, 1}, 1.0, f}}, 1e-12),
                 GeometryError);
    EXPECT_THROW(CrackGraph({Point(0, 0)}, {Chain{{Point(0, 0), Point(1, 0)}, {0, 1}, 1.0, f}}, 1e-12), GeometryError);
}

TEST(MarkCrack, SegmentInsideOneTriangle) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    const auto marked = mark_crack_elements(m, line_crack(Point(0.3, 0.1), Point(0.4, 0.15)));
    ASSERT_EQ(marked.size(), 1u);
    EXPECT_TRUE(point_in_triangle(m.points(static_cast<std::size_t>(marked[0])), Point(0.35, 0.125), 0.0));
}

TEST(MarkCrack, SegmentAlongSharedEdgeMarksBoth) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    const auto marked = mark_crack_elements(m, line_crack(Point(0.5, 0.1), Point(0.5, 0.4)));
    ASSERT_EQ(marked.size(), 2u);
    for (int t : marked) EXPECT_TRUE(point_in_triangle(m.points(static_cast<std::size_t>(t)), Point(0.5, 0.25), 1e-14));
}

TEST(MarkCrack, MissingCrackMarksNothing) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    EXPECT_TRUE(mark_crack_elements(m, line_crack(Point(2, 2), Point(3, 3))).empty());
    EXPECT_TRUE(mark_crack_elements(m, CrackGraph{}).empty());
}

namespace {

std::set<int> sample_marks(const Mesh& m, const CrackGraph& crack, double step) {
    std::set<int> out;
    const TriangleGrid grid(m);
    for (const auto& c : crack.chains())
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            const Point& p = c.points[k - 1];
            const Point& q = c.points[k];
            const int n = std::max(1, static_cast<int>(std::ceil((q - p).norm() / step)));
            for (int i = 0; i <= n; ++i) {
                const Point x = p + (static_cast<double>(i) / n) * (q - p);
                const Vec2 pad(m.tolerance(), m.tolerance());
                const Box b{x - pad, x + pad};
                for (int t : grid.candidates(b))
                    if (point_in_triangle(m.points(static_cast<std::size_t>(t)), x, m.tolerance())) out.insert(t);
            }
        }
    return out;
}

}  // namespace

TEST(MarkCrack, ArcMatchesDenseSampling) {
    const double h = 0.2;
    const Mesh m = radial_mesh(h);
    const CrackGraph crack = radial_crack(h, m.tolerance());
    const auto marked = mark_crack_elements(m, crack);
    // Sampling at h/100 can only miss triangles whose piece of the chain is
    // shorter than the sampling step.
    const auto coarse = sample_marks(m, crack, h / 100);
    for (int t : coarse) EXPECT_TRUE(std::binary_search(marked.begin(), marked.end(), t)) << t;
    for (int t : marked) {
        if (coarse.count(t)) continue;
        double len = 0.0;
        for (const auto& c : crack.chains())
            for (std::size_t k = 1; k < c.points.size(); ++k)
                if (auto s = segment_triangle_intersection(c.points[k - 1], c.points[k], m.points(static_cast<std::size_t>(t)),
                                                           m.tolerance()))
                    len += s->length();
        EXPECT_LT(len, h / 100) << t;
    }
    const auto fine = sample_marks(m, crack, h / 10000);
    EXPECT_EQ(std::vector<int>(fine.begin(), fine.end()), marked);
}

TEST(CutChains, SingleSegmentInsideOneTriangle) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    const auto cut = cut_chains(m, line_crack(Point(0.3, 0.1), Point(0.4, 0.15)));
    ASSERT_EQ(cut.segments.size(), 1u);
    EXPECT_EQ(cut.segments[0].seg.a, Point(0.3, 0.1));
    EXPECT_EQ(cut.segments[0].seg.b, Point(0.4, 0.15));
}

TEST(CutChains, SegmentSpanningTwoTriangles) {
    // Crosses the diagonal y = x of the lower-left cell at (0.2, 0.2).
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    const Point p(0.1, 0.3), q(0.3, 0.1);
    const auto cut = cut_chains(m, line_crack(p, q));
    ASSERT_EQ(cut.segments.size(), 2u);
    EXPECT_NEAR(cut.segments[0].seg.b.x(), 0.2, 1e-15);
    EXPECT_NEAR(cut.segments[0].seg.b.y(), 0.2, 1e-15);
    EXPECT_NEAR(cut.segments[0].length + cut.segments[1].length, (q - p).norm(), 1e-15);
    EXPECT_NE(cut.segments[0].triangle, cut.segments[1].triangle);
}

TEST(CutChains, EdgeAlignedSegmentOwnedOnce) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    const auto cut = cut_chains(m, line_crack(Point(0.5, 0.1), Point(0.5, 0.4)));
    ASSERT_EQ(cut.segments.size(), 1u);
    const auto marked = mark_crack_elements(m, line_crack(Point(0.5, 0.1), Point(0.5, 0.4)));
    EXPECT_EQ(cut.segments[0].triangle, *std::min_element(marked.begin(), marked.end()));
}

TEST(CutChains, ArcInvariantsOnRefinedMesh) {
    const double h = radial_side() / 16.0;
    Mesh m = radial_mesh(h);
    const CrackGraph crack = radial_crack(h, m.tolerance());
    RefinementConfig rc;
    rc.global_h = h;
    rc.rule = GammaRule::quadratic;
    m = refine_near_crack(m, crack, rc);
    const auto cut = cut_chains(m, crack);
    const double chain_len = crack.chains()[0].length();
    EXPECT_NEAR(cut.chain_length(0), chain_len, 1e-10 * chain_len);
    // Polyline vs. true arc: each chord of length s is short by about s³/(24 r²).
    const double arc_len = curve_length(radial_preset(false).crack.chains[0].curve);
    const double spacing = 0.1 * h;
    EXPECT_LE(arc_len - chain_len, arc_len * spacing * spacing / (24 * std::numbers::e * std::numbers::e));
    EXPECT_GE(arc_len, chain_len);
    const double tol = m.tolerance();
    for (std::size_t k = 0; k < cut.segments.size(); ++k) {
        const auto& s = cut.segments[k];
        const auto tri = m.points(static_cast<std::size_t>(s.triangle));
        EXPECT_GT(s.length, tol);
        EXPECT_TRUE(point_in_triangle(tri, s.seg.a, tol));
        EXPECT_TRUE(point_in_triangle(tri, s.seg.b, tol));
        EXPECT_TRUE(point_in_triangle(tri, s.seg.midpoint(), tol));
        if (k > 0) {
            EXPECT_EQ(cut.segments[k - 1].seg.b, s.seg.a);
            EXPECT_LT(cut.segments[k - 1].position, s.position);
        }
    }
    EXPECT_EQ(cut.segments.front().seg.a, crack.nodes()[0]);
    EXPECT_EQ(cut.segments.back().seg.b, crack.nodes()[1]);
}

TEST(CutChains, BifurcationSegmentsMeetAtNodes) {
    const auto cfg = crack_network_preset(false);
    const Mesh m = build_rectangle_mesh(cfg.domain, 0.5);
    const CrackGraph crack = build_crack(cfg, 0.5, m.tolerance());
    const auto cut = cut_chains(m, crack);
    for (std::size_t j = 0; j < crack.chains().size(); ++j) {
        const double len = crack.chains()[j].length();
        EXPECT_NEAR(cut.chain_length(static_cast<int>(j)), len, 1e-10 * len);
    }
    for (std::size_t i = 0; i < crack.nodes().size(); ++i) {
        for (int j : crack.incident_chains(i)) {
            const auto& nodes = crack.chain_nodes(static_cast<std::size_t>(j));
            const CrackSegment* end = nullptr;
            for (const auto& s : cut.segments)
                if (s.chain == j) {
                    if (nodes[0] == static_cast<int>(i) && !end) end = &s;
                    if (nodes[1] == static_cast<int>(i)) end = &s;
                }
            ASSERT_NE(end, nullptr);
            const Point tip = nodes[0] == static_cast<int>(i) ? end->seg.a : end->seg.b;
            EXPECT_EQ(tip, crack.nodes()[i]);
        }
    }
}

TEST(CutChains, CrackLeavingDomainIsDiagnosed) {
    const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 0.5);
    EXPECT_THROW(cut_chains(m, line_crack(Point(0.5, 0.5), Point(1.5, 0.5))), GeometryError);
}

TEST(SignedDistance, OnChainIsZero) {
    const CrackGraph g = line_crack(Point(0, 0), Point(1, 0));
    EXPECT_EQ(signed_distance_to_crack(Point(0.5, 0.0), g), 0.0);
    EXPECT_EQ(signed_distance_to_crack(Point(1.0, 0.0), g), 0.0);
}

TEST(SignedDistance, ClosedCircleSign) {
    const double e = std::numbers::e;
    const CircleCurve c{Point(0, 0), e, 0.0};
    const auto pts = sample_curve(c, 1e-3);
    const CrackGraph g({pts.front()}, {Chain{pts, {0, 0}, 1.0, constant_function(0.0)}}, 1e-12);
    const double sag = 1e-6 / (8 * e);
    for (double r : {1.0, 2.0, 2.5, 3.0, 3.4}) {
        const Point x(r * std::cos(0.7), r * std::sin(0.7));
        const double d = signed_distance_to_crack(x, g);
        // Positive in the enclosed region.
        EXPECT_NEAR(d, e - r, sag + 1e-12);
    }
}

TEST(SignedDistance, NetworkMatchesDenseSampling) {
    const auto cfg = crack_network_preset(false);
    const CrackGraph g = build_crack(cfg, 0.5, 1e-12);
    std::vector<Point> dense;
    const double step = 1e-3;
    for (const auto& c : g.chains())
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            const int n = static_cast<int>(std::ceil((c.points[k] - c.points[k - 1]).norm() / step));
            for (int i = 0; i <= n; ++i) dense.push_back(c.points[k - 1] + (double(i) / n) * (c.points[k] - c.points[k - 1]));
        }
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 13.0), uy(0.0, 9.5);
    for (int trial = 0; trial < 50; ++trial) {
        const Point x(ux(rng), uy(rng));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : dense) best = std::min(best, (p - x).norm());
        const double d = signed_distance_to_crack(x, g);
        EXPECT_LE(d, best + 1e-15);
        EXPECT_GE(d, best - step);
    }
}
