#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "rset/coverage.hpp"
#include "rset/vorobev.hpp"
#include "rset/weighted.hpp"

using namespace rset;

namespace {

Rational R(long long n, long long d) { return Rational(int64_t(n), int64_t(d)); }

Mask random_mask(const GridSpec& g, std::mt19937_64& gen) {
    Mask m(g);
    for (uint64_t c = 0; c < g.cell_count(); ++c)
        if (gen() & 1) m.set(c);
    return m;
}

CoverageField two_strip_field() {
    GridSpec g(1, 2);
    Mask a(g), b(g);
    a.set_run(0, 2);
    b.set_run(1, 3);
    return accumulate({a, b});
}

// field from n copies of one mask
CoverageField constant_field(const Mask& m, int n) {
    return accumulate(std::vector<Mask>(size_t(n), m));
}

} // namespace

TEST_CASE("two-strip thresholds and mean") {
    CoverageField f = two_strip_field();
    SurvivalCurve curve = survival_curve(f);
    Rational target = empirical_mean_volume(f);
    REQUIRE(target == R(1, 2));

    ThresholdReport rep = thresholds(curve, target);
    CHECK(rep.alpha_star == R(1, 2));
    CHECK(rep.beta_star == R(1, 2));
    CHECK(rep.plateau_flag);
    CHECK(!rep.empty_flag);

    // rank and fill: {p > 1/2} = cell 1, then tie cell 0 tops up 1/4
    WeightedMask k2 = kovyazin_mean(f, target);
    CHECK(k2.volume() == R(1, 2));
    CHECK(k2.fractional().empty());
    CHECK(k2.ones().count() == 2);
    CHECK(k2.ones().test(0));
    CHECK(k2.ones().test(1));

    // a smaller budget digs into the strict set only
    WeightedMask quarter = kovyazin_mean(f, R(1, 4));
    CHECK(quarter.ones().count() == 1);
    CHECK(quarter.ones().test(1));
    CHECK(alpha_star(curve, R(1, 4)) == R(1, 2));
    CHECK(beta_star(curve, R(1, 4)) == R(1, 1));

    // one level coarser the same threshold and the same continuous set
    CHECK(alpha_star_nr(f, 1, target) == R(1, 2));
    WeightedMask k21 = k_nr(f, 1, target);
    CHECK(k21.volume() == R(1, 2));
    CHECK(k21.ones().count() == 1);
    CHECK(k21.ones().test(0));
    CHECK(symm_diff_volume(refine(k21, 2), k2).is_zero());
}

TEST_CASE("thresholds on hand-built step curves") {
    using Step = SurvivalCurve::Step;

    // F = 1 on [0, 1/2), 1/4 afterwards: no threshold fits a 1/8 budget
    SurvivalCurve stuck = SurvivalCurve::from_steps(
        {Step{R(1, 2), R(1, 4)}}, Rational(1));
    CHECK(alpha_star(stuck, R(1, 8)) == R(1, 1));
    CHECK(beta_star(stuck, R(1, 8)) == R(1, 1));

    // F identically zero on [0,1]: a positive budget is never exhausted
    SurvivalCurve flat = SurvivalCurve::from_steps(
        {Step{R(0, 1), R(0, 1)}}, Rational(1));
    CHECK(alpha_star(flat, R(1, 4)).is_zero());
    bool empty = false;
    CHECK(beta_star(flat, R(1, 4), &empty).is_zero());
    CHECK(empty);
    // while a zero budget is met everywhere
    empty = true;
    CHECK(beta_star(flat, R(0, 1), &empty) == R(1, 1));
    CHECK(!empty);

    CHECK_THROWS_AS(alpha_star(flat, R(-1, 4)), std::invalid_argument);
    CHECK_THROWS_AS(beta_star(flat, R(-1, 4)), std::invalid_argument);
}

TEST_CASE("constant replicates collapse the mean onto the common set") {
    GridSpec g(2, 3);
    Mask box(g);
    for (uint32_t y = 2; y < 6; ++y)
        for (uint32_t x = 2; x < 6; ++x) box.set(cell_linear(g, {x, y, 0}));
    REQUIRE(volume(box) == R(1, 4));

    CoverageField f = constant_field(box, 5);
    Rational target = empirical_mean_volume(f);
    CHECK(target == R(1, 4));

    SurvivalCurve curve = survival_curve(f);
    ThresholdReport rep = thresholds(curve, target);
    // F(0) = 1/4 already fits the budget, so the infimum sits at zero
    CHECK(rep.alpha_star == R(0, 1));
    CHECK(rep.beta_star == R(1, 1));
    CHECK(rep.plateau_flag); // lambda{p = 0} = 3/4

    WeightedMask k = kovyazin_mean(f, target);
    CHECK(k == WeightedMask::from_mask(box));

    // zero budget: threshold tops out, the mean is empty
    CHECK(alpha_star(curve, R(0, 1)) == R(1, 1));
    CHECK(kovyazin_mean(f, R(0, 1)).volume().is_zero());
}

TEST_CASE("budget above the attainable support flags emptiness") {
    GridSpec g(2, 3);
    Mask box(g);
    for (uint32_t y = 2; y < 6; ++y)
        for (uint32_t x = 2; x < 6; ++x) box.set(cell_linear(g, {x, y, 0}));

    CoverageField f = constant_field(box, 3);
    SurvivalCurve curve = survival_curve(f);

    ThresholdReport rep = thresholds(curve, R(1, 2));
    CHECK(rep.alpha_star.is_zero()); // F(0) = 1/4 <= 1/2
    CHECK(rep.beta_star.is_zero());
    CHECK(rep.empty_flag);

    // the mean still exists: the tie class {p = 0} absorbs the excess,
    // filled by ascending cell index
    WeightedMask k = kovyazin_mean(f, R(1, 2));
    CHECK(k.volume() == R(1, 2));
    CHECK(mask_and(k.ones(), box) == box);
    uint64_t extra_seen = 0;
    for (uint64_t c = 0; c < g.cell_count() && extra_seen < 16; ++c) {
        if (box.test(c)) continue;
        CHECK(k.weight(c) == R(1, 1)); // lowest-index outside cells first
        ++extra_seen;
    }
}

TEST_CASE("uniform total coverage fills by cell index") {
    GridSpec g(2, 2);
    Mask full(g);
    full.set_run(0, g.cell_count());
    CoverageField f = constant_field(full, 4);

    WeightedMask k = kovyazin_mean(f, R(1, 2));
    CHECK(k.volume() == R(1, 2));
    CHECK(k.ones().count() == 8);
    for (uint64_t c = 0; c < 8; ++c) CHECK(k.ones().test(c));

    WeightedMask frac = kovyazin_mean(f, R(3, 32));
    CHECK(frac.volume() == R(3, 32));
    CHECK(frac.ones().count() == 1); // cell 0 whole
    REQUIRE(frac.fractional().size() == 1);
    CHECK(frac.fractional()[0].first == 1);
    CHECK(frac.fractional()[0].second == R(1, 2));
}

TEST_CASE("rank and fill structure on random fields") {
    std::mt19937_64 gen(2718);
    GridSpec g(2, 3);
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<Mask> reps;
        int n = 2 + int(gen() % 8);
        for (int i = 0; i < n; ++i) reps.push_back(random_mask(g, gen));
        CoverageField f = accumulate(reps);
        Rational target = empirical_mean_volume(f);
        SurvivalCurve curve = survival_curve(f);
        Rational astar = alpha_star(curve, target);

        WeightedMask k = kovyazin_mean(f, target);
        CHECK(k.volume() == target);
        CHECK(k.fractional().size() <= 1);

        Mask strict = level_set(f, astar, true);
        Mask loose = level_set(f, astar, false);
        CHECK(mask_and(strict, k.ones()) == strict); // strict cells all kept

        // the tie class is consumed as a prefix in cell order
        bool past_fill = false;
        for (uint64_t c = 0; c < g.cell_count(); ++c) {
            Rational w = k.weight(c);
            if (strict.test(c)) {
                CHECK(w == R(1, 1));
                continue;
            }
            if (!loose.test(c)) {
                CHECK(w.is_zero());
                continue;
            }
            // tie cell: full until the budget runs out, nothing after
            if (past_fill) CHECK(w.is_zero());
            if (w < R(1, 1)) past_fill = true;
        }

        // coarse means share the budget exactly at every level
        for (int kk = 1; kk <= 3; ++kk) {
            WeightedMask km = k_nr(f, kk, target);
            CHECK(km.volume() == target);
            Rational anr = alpha_star_nr(f, kk, target);
            CoverageField cf = coarsen_field(f, kk);
            Mask cstrict = level_set(cf, anr, true);
            CHECK(mask_and(cstrict, km.ones()) == cstrict);
            // positive weight never escapes the closed level set
            Mask cloose = level_set(cf, anr, false);
            CHECK(mask_and(km.ones(), cloose) == km.ones());
        }
    }
}

TEST_CASE("the mean minimizes the average distance to the replicates") {
    // d = 2, level 2: 16 cells, so every vertex of the volume-constrained
    // polytope (binary masks plus at most one fractional cell) can be
    // enumerated and the estimator's cost compared against all of them
    std::mt19937_64 gen(424242);
    GridSpec g(2, 2);
    const Rational cell_vol = g.cell_volume();

    for (int trial = 0; trial < 6; ++trial) {
        int n = 3 + int(trial % 2);
        std::vector<Mask> reps;
        std::vector<uint32_t> bits;
        for (int i = 0; i < n; ++i) {
            Mask m = random_mask(g, gen);
            reps.push_back(m);
            uint32_t b = 0;
            for (uint64_t c = 0; c < 16; ++c)
                if (m.test(c)) b |= uint32_t(1) << c;
            bits.push_back(b);
        }
        CoverageField f = accumulate(reps);
        Rational target = empirical_mean_volume(f);
        uint64_t tc = f.total_count();
        if (tc == 0) continue;

        int whole = int(tc / n);            // weight-1 cells in any vertex
        Rational theta = R(int64_t(tc % n), n); // fractional remainder

        // per-cell cost of weight w is m_c + w (n - 2 m_c), in cell units
        int slope[16];
        for (int c = 0; c < 16; ++c) slope[c] = n - 2 * int(f.counts[c]);

        WeightedMask k = kovyazin_mean(f, target);
        Rational k_cost(0);
        for (uint64_t c = 0; c < 16; ++c)
            k_cost = k_cost + Rational(int64_t(f.counts[c])) +
                     k.weight(c) * Rational(int64_t(slope[c]));

        // the same cost through the symmetric-difference metric
        Rational direct(0);
        for (const Mask& m : reps) direct = direct + symm_diff_volume(k, m);
        CHECK(direct == k_cost * cell_vol);

        Rational best = k_cost;
        for (uint32_t s = 0; s < (uint32_t(1) << 16); ++s) {
            if (std::popcount(s) != whole) continue;
            int base = int(tc);
            for (int c = 0; c < 16; ++c)
                if (s & (uint32_t(1) << c)) base += slope[c];
            if (theta.is_zero()) {
                if (Rational(base) < best) best = Rational(base);
                continue;
            }
            for (int fc = 0; fc < 16; ++fc) {
                if (s & (uint32_t(1) << fc)) continue;
                Rational cost = Rational(base) + theta * Rational(slope[fc]);
                if (cost < best) best = cost;
            }
        }
        CHECK(k_cost == best);
    }
}

TEST_CASE("weighted masks behave like densities") {
    GridSpec g(2, 2);
    WeightedMask w(g);
    w.set_one(3);
    w.set_weight(7, R(1, 3));
    w.set_weight(5, R(1, 4)); // out of order: must be resorted
    CHECK(w.weight(3) == R(1, 1));
    CHECK(w.weight(5) == R(1, 4));
    CHECK(w.weight(7) == R(1, 3));
    CHECK(w.weight(0).is_zero());
    REQUIRE(w.fractional().size() == 2);
    CHECK(w.fractional()[0].first == 5);
    CHECK(w.volume() == (Rational(1) + R(1, 3) + R(1, 4)) * g.cell_volume());

    // weights 0 and 1 collapse into the bit mask
    w.set_weight(9, R(1, 1));
    CHECK(w.ones().test(9));
    w.set_weight(2, R(0, 1));
    CHECK(w.weight(2).is_zero());
    CHECK_THROWS_AS(w.set_weight(1, R(5, 4)), std::invalid_argument);
    CHECK_THROWS_AS(w.set_weight(1, R(-1, 4)), std::invalid_argument);

    WeightedMask dup(g);
    dup.set_weight(4, R(1, 3));
    dup.set_weight(4, R(1, 5));
    CHECK_THROWS_AS(dup.normalize_fractional(), std::invalid_argument);

    // distance to the own weight-1 part is the fractional mass
    WeightedMask v(g);
    v.set_one(3);
    v.set_weight(7, R(1, 3));
    Rational d = symm_diff_volume(v, v.ones());
    CHECK(d == R(1, 3) * g.cell_volume());
    CHECK(symm_diff_volume(v.ones(), v) == d);
    CHECK(symm_diff_volume(v, v).is_zero());

    // refinement inherits weights and preserves volume and distances
    WeightedMask fine = refine(v, 4);
    CHECK(fine.volume() == v.volume());
    CHECK(fine.fractional().size() == 16); // one coarse cell, 4x4 block
    WeightedMask u(g);
    u.set_one(7);
    CHECK(symm_diff_volume(refine(v, 4), refine(u, 4)) == symm_diff_volume(v, u));
}

TEST_CASE("oracle mean shape on the linear ramp") {
    CoverageOracle oracle;
    oracle.p = [](const std::array<double, 3>& x) { return x[0]; };
    oracle.source = "linear ramp";
    GridSpec g(1, 3);
    QuantizedField q = sample_oracle(oracle, g, 4);

    // quantized coverage integral: sum of (2i+1)/16 over 8 cells of 1/8
    Rational mean(0);
    for (uint64_t c = 0; c < 8; ++c)
        mean = mean + q.value(c) * g.cell_volume();
    REQUIRE(mean == R(1, 2));

    OracleExpectation ev = vorobev_from_oracle(q, mean);
    CHECK(ev.report.alpha_star == R(7, 16));
    CHECK(ev.report.beta_star == R(9, 16));
    CHECK(ev.report.plateau_flag); // quantized values always carry mass
    CHECK(!ev.report.empty_flag);
    CHECK(ev.shape.volume() == R(1, 2));
    CHECK(ev.shape.fractional().empty());
    for (uint64_t c = 0; c < 8; ++c)
        CHECK(ev.shape.ones().test(c) == (c >= 4));

    CHECK_THROWS_AS(kovyazin_mean(two_strip_field(), R(9, 8)),
                    std::invalid_argument);
}
