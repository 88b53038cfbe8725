#include <bsthermo/bs_map.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace bsthermo;

namespace {

const std::string kOct = "octagon-genus2", kSch = "schottky-rank2", kTor = "punctured-torus-ideal-square";

// Middle of a random admissible cylinder of length 24, a stand-in for a limit point.
double limit_point(const BSMap<double>& F, const GeometricAutomaton& A, std::mt19937_64& rng) {
    Word w;
    int s = A.start;
    for (int k = 0; k < 24; ++k) {
        std::vector<int> opts;
        for (int x = 0; x < F.m(); ++x)
            if (A.next[s][x] >= 0) opts.push_back(x);
        int x = opts[rng() % opts.size()];
        w.push_back(x);
        s = A.next[s][x];
    }
    auto c = cylinder(F, w);
    return wrap_angle<double>(c.arc.start + 0.5 * c.arc.length);
}

}  // namespace

TEST(BSMap, BranchesCoverDomain) {
    auto oct = construct_bs<double>(builtin_spec(kOct));
    EXPECT_EQ(oct.branches.size(), 8u);
    EXPECT_NEAR(oct.domain_measure(), 2 * pi_v<double>(), 1e-12);

    auto sch = construct_bs<double>(builtin_spec(kSch));
    EXPECT_EQ(sch.branches.size(), 4u);
    EXPECT_LT(sch.domain_measure(), 2 * pi_v<double>() - 0.1);
    // the free gaps are outside the domain
    EXPECT_EQ(sch.branch_of(0.785), -1);
    EXPECT_FALSE(sch.apply(0.785));
}

TEST(BSMap, BreakpointsBelongToTheRightBranch) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    for (const auto& b : F.branches) {
        EXPECT_EQ(F.branch_of(b.arc.start), b.letter);
        EXPECT_EQ(F.branch_of(b.arc.start + 1e-9), b.letter);
    }
}

TEST(BSMap, MapIsExpandingOnEachBranch) {
    for (const auto& name : builtin_names()) {
        auto F = construct_bs<double>(builtin_spec(name));
        for (const auto& b : F.branches) {
            auto img = image(F.G().gen_bar[b.letter], b.arc);
            EXPECT_GT(img.length, b.arc.length) << name;
        }
    }
}

TEST(BSMap, ExpansionFollowsTheMap) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    double t = 1.2345;
    auto e = f_expand(F, t, 10);
    ASSERT_EQ(e.word.size(), 10u);
    EXPECT_EQ(e.escape_index, -1);
    double s = 0;
    for (int k = 0; k < 10; ++k) {
        auto r = F.apply(t);
        ASSERT_TRUE(r);
        EXPECT_EQ(r->first, e.word[k]);
        s += F.log_derivative(t);
        t = r->second;
    }
    EXPECT_NEAR(s, e.lyapunov_sum, 1e-9);
    // the point lies in the cylinder of its own expansion
    auto c = cylinder(F, e.word);
    EXPECT_TRUE(c.arc.contains(1.2345));
}

TEST(BSMap, ExpansionEscapesThroughGaps) {
    auto F = construct_bs<double>(builtin_spec(kSch));
    auto e = f_expand(F, 0.785, 5);
    EXPECT_EQ(e.escape_index, 0);
    EXPECT_TRUE(e.word.empty());
}

// Admissible words of length n biject with group elements of word length n.
TEST(BSMap, GeometricAutomatonCountsMatchSpheres) {
    auto oct = geometric_automaton(construct_bs<double>(builtin_spec(kOct))).counts(6);
    EXPECT_EQ(std::vector<double>(oct.begin() + 1, oct.end()), (std::vector<double>{8, 56, 392, 2736, 19096, 133288}));
    auto tor = geometric_automaton(construct_bs<double>(builtin_spec(kTor))).counts(6);
    EXPECT_EQ(std::vector<double>(tor.begin() + 1, tor.end()), (std::vector<double>{4, 12, 36, 108, 324, 972}));
    auto sch = geometric_automaton(construct_bs<double>(builtin_spec(kSch))).counts(8);
    for (int n = 1; n <= 8; ++n) EXPECT_EQ(sch[n], 4 * std::pow(3.0, n - 1));
}

// Two chained clockwise half cycles pass the local pattern rules but are not f-expansion words.
TEST(BSMap, PatternRulesAloneOveraccept) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    Word w{0, 5, 2, 7, 5, 2, 7, 4};  // e1 e6 e3 e8 e6 e3 e8 e5
    EXPECT_TRUE(is_admissible(F.G(), w, Orientation::ccw));
    EXPECT_FALSE(is_admissible(F, w));
    EXPECT_FALSE(try_cylinder(F, w));
}

TEST(BSMap, OrientationResolvesToAnticlockwise) {
    for (const auto& name : {kOct, kTor}) {
        auto [o, ok] = resolve_orientation(construct_bs<double>(builtin_spec(name)));
        EXPECT_TRUE(ok) << name;
        EXPECT_EQ(o, Orientation::ccw) << name;
    }
}

TEST(BSMap, ReduceToAdmissibleKeepsTheElement) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    const auto& c = F.G().cycles[0];
    Word h(c.acw.begin(), c.acw.begin() + c.n);  // a forbidden half cycle
    Word r = reduce_to_admissible(F, h);
    EXPECT_TRUE(is_admissible(F, r));
    EXPECT_EQ(r.size(), h.size());
    EXPECT_LT(F.G().eval(r).distance_to(F.G().eval(h)), 1e-8);
    // the over-accepted word is not a shortest word at all
    EXPECT_THROW(reduce_to_admissible(F, Word{0, 5, 2, 7, 5, 2, 7, 4}), GroupError);
}

// Without vertices the cutting sequence and the f-expansion coincide letter by letter.
TEST(BSMap, SchottkyCuttingSequenceIsTheExpansion) {
    auto F = construct_bs<double>(builtin_spec(kSch));
    auto A = geometric_automaton(F);
    ParallelChecker<double> P(F);
    std::mt19937_64 rng(11);
    int tested = 0;
    while (tested < 40) {
        double neg = limit_point(F, A, rng), pos = limit_point(F, A, rng);
        if (!meets_interior(F, neg, pos)) continue;
        ++tested;
        auto rep = P.run(neg, pos, 15);
        EXPECT_TRUE(rep.all_pass());
        EXPECT_EQ(rep.count(ParallelFrame::same), (int)rep.frames.size());
    }
}

TEST(BSMap, ParallelCheckOnOctagon) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 2 * pi_v<double>());
    for (int k = 0; k < 20; ++k) {
        double neg = u(rng), pos = u(rng);
        if (!meets_interior(F, neg, pos)) continue;
        auto rep = parallel_check(F, neg, pos, 20);
        EXPECT_TRUE(rep.all_pass()) << neg << " " << pos;
        EXPECT_GT(rep.frames.size(), 0u);
    }
}

TEST(BSMap, GrowthTracksLyapunovSum) {
    auto F = construct_bs<double>(builtin_spec(kOct));
    auto g = growth_vs_lyapunov(F, 0.3, 3.9, 25);
    ASSERT_FALSE(g.gap.empty());
    for (double d : g.gap) EXPECT_LT(d, 10.0);
}
