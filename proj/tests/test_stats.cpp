#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "logtriage/errors.hpp"
#include "logtriage/stats.hpp"
#include "oracles.hpp"

using namespace logtriage;
using doctest::Approx;

namespace {

// k treatments x n blocks with every block ranking treatments the same way.
BlockTable consistent_table(int k, int n) {
    BlockTable t;
    for (int i = 0; i < k; ++i) t.treatments.push_back("t" + std::to_string(i));
    for (int b = 0; b < n; ++b) t.blocks.push_back("b" + std::to_string(b));
    t.scores.assign(k, std::vector<double>(n));
    for (int i = 0; i < k; ++i)
        for (int b = 0; b < n; ++b) t.scores[i][b] = i + 0.1 * b;
    return t;
}

BlockTable two_treatment_table(const std::vector<double>& a, const std::vector<double>& b) {
    BlockTable t;
    t.treatments = {"a", "b"};
    for (size_t i = 0; i < a.size(); ++i) t.blocks.push_back("b" + std::to_string(i));
    t.scores = {a, b};
    return t;
}

}  // namespace

TEST_CASE("ranks average over ties") {
    CHECK(ranks_with_ties({10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(ranks_with_ties({30, 10, 20}) == std::vector<double>{3, 1, 2});
    CHECK(ranks_with_ties({5, 5, 7}) == std::vector<double>{1.5, 1.5, 3});
    CHECK(ranks_with_ties({4, 4, 4, 4}) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
    CHECK(ranks_with_ties({1, 2, 2, 2, 9}) == std::vector<double>{1, 3, 3, 3, 5});
}

TEST_CASE("block table validation rejects broken designs") {
    BlockTable ok = consistent_table(3, 4);
    CHECK_NOTHROW(validate(ok));

    BlockTable ragged = ok;
    ragged.scores[1].pop_back();
    CHECK_THROWS_AS(validate(ragged), IncompleteDesignError);

    BlockTable nan_cell = ok;
    nan_cell.scores[0][2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(nan_cell), IncompleteDesignError);

    BlockTable one_treatment = ok;
    one_treatment.treatments.resize(1);
    one_treatment.scores.resize(1);
    CHECK_THROWS_AS(validate(one_treatment), IncompleteDesignError);

    BlockTable one_block = consistent_table(3, 1);
    CHECK_THROWS_AS(validate(one_block), IncompleteDesignError);

    BlockTable misaligned = ok;
    misaligned.scores.pop_back();
    CHECK_THROWS_AS(validate(misaligned), IncompleteDesignError);
}

TEST_CASE("friedman on fully consistent rankings matches the closed form") {
    // k=3 treatments, identical order in every block: chi2 = 2n, df = 2,
    // and the chi-squared survival at 2n is exp(-n).
    for (int n : {3, 5, 10}) {
        TestResult r = friedman(consistent_table(3, n));
        CHECK(r.statistic == Approx(2.0 * n).epsilon(1e-9));
        CHECK(r.p == Approx(std::exp(-static_cast<double>(n))).epsilon(1e-9));
    }
}

TEST_CASE("friedman on identical treatments is a null result") {
    BlockTable t = consistent_table(3, 5);
    for (auto& row : t.scores) row = t.scores[0];
    TestResult r = friedman(t);
    CHECK(r.statistic == Approx(0.0).epsilon(1e-12));
    CHECK(r.p == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("friedman with two treatments matches the sign-count closed form") {
    // With k=2 and no ties, chi2 = (2w - n)^2 / n where w counts blocks
    // preferring the first treatment.
    std::vector<double> a = {1.0, 5.0, 3.0, 4.0};
    std::vector<double> b = {2.0, 1.0, 1.0, 3.0};  // a wins blocks 1,2,3
    TestResult r = friedman(two_treatment_table(a, b));
    double w = 3.0, n = 4.0;
    CHECK(r.statistic == Approx((2.0 * w - n) * (2.0 * w - n) / n).epsilon(1e-9));
}

TEST_CASE("friedman applies the tie correction") {
    // One block has a two-way tie; the tie-corrected statistic must exceed
    // what the uncorrected formula would give on mean ranks.
    BlockTable t;
    t.treatments = {"a", "b", "c"};
    t.blocks = {"b0", "b1", "b2"};
    t.scores = {
        {1.0, 1.0, 1.0},
        {2.0, 2.0, 1.0},  // ties treatment a in the last block
        {3.0, 3.0, 3.0},
    };
    TestResult r = friedman(t);
    // Mean ranks: block ranks (1,2,3), (1,2,3), (1.5,1.5,3).
    // Uncorrected chi2 = 12n/(k(k+1)) * sum (rbar - (k+1)/2)^2 with n=3,k=3.
    double uncorrected = 12.0 * 3.0 / (3.0 * 4.0) *
                         ((7.0 / 6.0 - 2.0) * (7.0 / 6.0 - 2.0) +
                          (11.0 / 6.0 - 2.0) * (11.0 / 6.0 - 2.0) + 1.0);
    CHECK(r.statistic > uncorrected);
    CHECK(std::isfinite(r.p));
}

TEST_CASE("friedman is invariant under monotone transforms of scores") {
    std::mt19937_64 rng(73);
    BlockTable t;
    t.treatments = {"a", "b", "c", "d"};
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = 8;
    for (int b = 0; b < n; ++b) t.blocks.push_back("blk" + std::to_string(b));
    t.scores.assign(4, std::vector<double>(n));
    for (auto& row : t.scores)
        for (double& cell : row) cell = uni(rng);

    BlockTable warped = t;
    for (auto& row : warped.scores)
        for (double& cell : row) cell = std::exp(3.0 * cell) - 0.5;

    TestResult r1 = friedman(t);
    TestResult r2 = friedman(warped);
    CHECK(r1.statistic == Approx(r2.statistic).epsilon(1e-12));
    CHECK(r1.p == Approx(r2.p).epsilon(1e-12));
}

TEST_CASE("wilcoxon with identical samples is a null result") {
    std::vector<double> a = {1, 2, 3, 4};
    TestResult r = wilcoxon_pratt(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("wilcoxon exact p on all-positive differences hits the sign bound") {
    // n=5 strictly positive differences: W- = 0, two-sided p = 2/2^5 = 1/16.
    std::vector<double> a = {2, 3, 4, 5, 6};
    std::vector<double> b = {1, 2, 3, 4, 5};
    TestResult two = wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Exact);
    CHECK(two.statistic == 0.0);
    CHECK(two.p == Approx(1.0 / 16.0).epsilon(1e-12));
    TestResult greater = wilcoxon_pratt(a, b, Sidedness::Greater, WilcoxonMode::Exact);
    CHECK(greater.p == Approx(1.0 / 32.0).epsilon(1e-12));
    TestResult less = wilcoxon_pratt(a, b, Sidedness::Less, WilcoxonMode::Exact);
    CHECK(less.p == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero differences are ranked before being dropped") {
    // Differences {0,0,1,-1,2,3}: Pratt ranks zeros (1.5,1.5), then
    // |1|,|−1| get (3.5,3.5), |2| gets 5, |3| gets 6.
    // W+ = 3.5+5+6 = 14.5, W- = 3.5, T = 3.5.
    // Dropping zeros first would instead give T = 1.5.
    std::vector<double> a = {5, 5, 6, 4, 7, 8};
    std::vector<double> b = {5, 5, 5, 5, 5, 5};
    TestResult r = wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Exact);
    CHECK(r.statistic == Approx(3.5).epsilon(1e-12));
    CHECK(r.p == Approx(0.375).epsilon(1e-12));
}

TEST_CASE("exact wilcoxon matches full sign enumeration on random fixtures") {
    std::mt19937_64 rng(79);
    std::uniform_int_distribution<int> val(-4, 6);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng() % 8);
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = val(rng);
            b[i] = val(rng);
        }
        auto want = oracles::enumerate_wilcoxon(a, b);
        TestResult got = wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Exact);
        CAPTURE(trial);
        CHECK(got.statistic == Approx(want.statistic).epsilon(1e-12));
        CHECK(got.p == Approx(want.p).epsilon(1e-10));
    }
}

TEST_CASE("auto mode switches from exact to normal at ten pairs") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    std::vector<double> a9(9), b9(9);
    for (int i = 0; i < 9; ++i) {
        a9[i] = uni(rng);
        b9[i] = uni(rng);
    }
    TestResult auto9 = wilcoxon_pratt(a9, b9, Sidedness::TwoSided, WilcoxonMode::Auto);
    TestResult exact9 = wilcoxon_pratt(a9, b9, Sidedness::TwoSided, WilcoxonMode::Exact);
    CHECK(auto9.p == exact9.p);

    std::vector<double> a12(12), b12(12);
    for (int i = 0; i < 12; ++i) {
        a12[i] = uni(rng);
        b12[i] = uni(rng);
    }
    TestResult auto12 = wilcoxon_pratt(a12, b12, Sidedness::TwoSided, WilcoxonMode::Auto);
    TestResult norm12 = wilcoxon_pratt(a12, b12, Sidedness::TwoSided, WilcoxonMode::Normal);
    CHECK(auto12.p == norm12.p);
}

TEST_CASE("normal approximation stays close to exact near the switch point") {
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a(14), b(14);
        for (int i = 0; i < 14; ++i) {
            a[i] = uni(rng);
            b[i] = uni(rng);
        }
        TestResult exact = wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Exact);
        TestResult normal = wilcoxon_pratt(a, b, Sidedness::TwoSided, WilcoxonMode::Normal);
        CHECK(std::abs(normal.p - exact.p) < 0.05);
        CHECK(normal.statistic == exact.statistic);
    }
}

TEST_CASE("wilcoxon rejects unusable inputs") {
    CHECK_THROWS_AS(wilcoxon_pratt({1, 2}, {1}), LengthMismatchError);
    CHECK_THROWS_AS(wilcoxon_pratt({}, {}), LengthMismatchError);
}

TEST_CASE("holm adjustment matches hand-worked examples") {
    std::vector<double> adj = holm({0.01, 0.04});
    REQUIRE(adj.size() == 2);
    CHECK(adj[0] == Approx(0.02).epsilon(1e-12));
    CHECK(adj[1] == Approx(0.04).epsilon(1e-12));

    std::vector<double> adj3 = holm({0.03, 0.01, 0.04});
    CHECK(adj3[0] == Approx(0.06).epsilon(1e-12));   // 0.03*2, then max with prior
    CHECK(adj3[1] == Approx(0.03).epsilon(1e-12));   // 0.01*3
    CHECK(adj3[2] == Approx(0.06).epsilon(1e-12));   // 0.04*1 capped by monotonicity

    std::vector<double> capped = holm({0.9, 0.8});
    CHECK(capped[0] == 1.0);  // 0.9*1 but monotone after 0.8*2 = 1.6 -> capped
    CHECK(capped[1] == 1.0);
}

TEST_CASE("holm output dominates the input and respects permutations") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng() % 6);
        std::vector<double> p(m);
        for (double& x : p) x = uni(rng);
        std::vector<double> adj = holm(p);
        REQUIRE(adj.size() == p.size());
        for (int i = 0; i < m; ++i) {
            CHECK(adj[i] >= p[i] - 1e-15);
            CHECK(adj[i] <= 1.0);
        }
        // Equivariance: permuting inputs permutes outputs the same way.
        std::vector<int> perm(m);
        for (int i = 0; i < m; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> shuffled(m);
        for (int i = 0; i < m; ++i) shuffled[i] = p[perm[i]];
        std::vector<double> adj_shuffled = holm(shuffled);
        for (int i = 0; i < m; ++i) {
            CHECK(adj_shuffled[i] == Approx(adj[perm[i]]).epsilon(1e-12));
        }
    }
}

TEST_CASE("holm rejects out-of-range p-values") {
    CHECK_THROWS_AS(holm({0.5, -0.1}), RangeError);
    CHECK_THROWS_AS(holm({0.5, 1.5}), RangeError);
    CHECK(holm({}).empty());
}

TEST_CASE("vargha-delaney matches hand values and the pair-count oracle") {
    auto [a12, a21] = vargha_delaney({1, 3}, {2, 2});
    CHECK(a12 == Approx(0.5).epsilon(1e-12));
    CHECK(a21 == Approx(0.5).epsilon(1e-12));

    auto [all, none] = vargha_delaney({5, 6}, {1, 2});
    CHECK(all == Approx(1.0).epsilon(1e-12));
    CHECK(none == Approx(0.0).epsilon(1e-12));

    auto [tied, tied21] = vargha_delaney({2, 2}, {2, 2});
    CHECK(tied == Approx(0.5).epsilon(1e-12));
    CHECK(tied21 == Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> val(0, 5);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rng() % 7);
        int m = 1 + static_cast<int>(rng() % 7);
        std::vector<double> a(n), b(m);
        for (double& x : a) x = val(rng);
        for (double& x : b) x = val(rng);
        auto [got12, got21] = vargha_delaney(a, b);
        CHECK(got12 == Approx(oracles::naive_a12(a, b)).epsilon(1e-12));
        CHECK(got12 + got21 == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("vargha-delaney rejects empty samples") {
    CHECK_THROWS_AS(vargha_delaney({}, {1.0}), EmptySampleError);
    CHECK_THROWS_AS(vargha_delaney({1.0}, {}), EmptySampleError);
}

TEST_CASE("rank groups separate clearly distinct treatments") {
    // Three treatments with strictly ordered scores in every block.
    BlockTable t = consistent_table(3, 12);
    std::vector<PairwiseComparison> pw;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            PairwiseComparison c;
            c.a = i;
            c.b = j;
            c.result.p = 0.001;
            c.result.adjusted_p = 0.003;  // everything significant
            pw.push_back(c);
        }
    }
    auto rows = rank_groups(t, pw, 0.05);
    REQUIRE(rows.size() == 3);
    // Best (highest scores) first: t2, then t1, then t0.
    CHECK(rows[0].treatment == "t2");
    CHECK(rows[1].treatment == "t1");
    CHECK(rows[2].treatment == "t0");
    CHECK(rows[0].group == "a");
    CHECK(rows[1].group == "b");
    CHECK(rows[2].group == "c");
    CHECK(rows[0].mean_score > rows[1].mean_score);
}

TEST_CASE("rank groups share a letter when a pair is not significant") {
    BlockTable t = consistent_table(3, 12);
    std::vector<PairwiseComparison> pw;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            PairwiseComparison c;
            c.a = i;
            c.b = j;
            // t1 vs t2 indistinguishable; both crush t0.
            c.result.adjusted_p = (i == 0) ? 0.001 : 0.9;
            pw.push_back(c);
        }
    }
    auto rows = rank_groups(t, pw, 0.05);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].treatment == "t2");
    CHECK(rows[0].group == rows[1].group);       // t2 and t1 share a letter
    CHECK(rows[2].group != rows[0].group);       // t0 stands alone
}

TEST_CASE("rank groups merge everything when nothing is significant") {
    BlockTable t = consistent_table(4, 6);
    std::vector<PairwiseComparison> pw;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            PairwiseComparison c;
            c.a = i;
            c.b = j;
            c.result.adjusted_p = 0.5;
            pw.push_back(c);
        }
    }
    auto rows = rank_groups(t, pw, 0.05);
    for (const auto& row : rows) CHECK(row.group == rows[0].group);
}

TEST_CASE("rank groups demand a complete pairwise set") {
    BlockTable t = consistent_table(3, 6);
    std::vector<PairwiseComparison> pw;
    PairwiseComparison only;
    only.a = 0;
    only.b = 1;
    only.result.adjusted_p = 0.5;
    pw.push_back(only);
    CHECK_THROWS_AS(rank_groups(t, pw, 0.05), MissingComparisonError);
}

TEST_CASE("rank group rows report medians and means of the raw scores") {
    BlockTable t = two_treatment_table({1.0, 2.0, 9.0}, {4.0, 5.0, 6.0});
    std::vector<PairwiseComparison> pw(1);
    pw[0].a = 0;
    pw[0].b = 1;
    pw[0].result.adjusted_p = 0.2;
    auto rows = rank_groups(t, pw, 0.05);
    REQUIRE(rows.size() == 2);
    // b has the better rank sum (wins blocks 0 and 1).
    CHECK(rows[0].treatment == "b");
    CHECK(rows[0].median_score == Approx(5.0).epsilon(1e-12));
    CHECK(rows[0].mean_score == Approx(5.0).epsilon(1e-12));
    CHECK(rows[1].median_score == Approx(2.0).epsilon(1e-12));
    CHECK(rows[1].mean_score == Approx(4.0).epsilon(1e-12));
}
