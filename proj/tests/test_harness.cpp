#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <rset/boolean_model.hpp>
#include <rset/boxdim.hpp>
#include <rset/config.hpp>
#include <rset/coverage.hpp>
#include <rset/grid.hpp>
#include <rset/harness.hpp>
#include <rset/mask_io.hpp>
#include <rset/vorobev.hpp>

using namespace rset;
namespace fs = std::filesystem;

namespace {

using P3 = std::array<double, 3>;

std::string scratch() {
    char tmpl[] = "/tmp/rset_harness_XXXXXX";
    char* dir = mkdtemp(tmpl);
    REQUIRE(dir != nullptr);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, sep)) out.push_back(f);
    return out;
}

ParsedConfig bump_run(int K, uint32_t n, uint64_t seed) {
    ParsedConfig cfg;
    cfg.model.model = ModelKind::NonStationary;
    cfg.model.grid = GridSpec{2, K};
    cfg.model.intensity.kind = IntensityKind::SeparableBump;
    cfg.model.intensity.m0 = 5.0;
    cfg.model.intensity.m1 = 20.0;
    cfg.model.radius = RadiusLaw::uniform(0.05, 0.15);
    cfg.model.seed = seed;
    cfg.model.n = n;
    return cfg;
}

ParsedConfig atom_disk_run(int K, double q) {
    ParsedConfig cfg;
    cfg.model.model = ModelKind::Atoms;
    cfg.model.grid = GridSpec{2, K};
    cfg.model.intensity.m0 = 0.0;
    cfg.model.radius = RadiusLaw::dirac(0.05);
    cfg.model.atom_radius = 0.3;
    cfg.model.atoms.push_back(Atom{P3{0.5, 0.5, 0.0}, q});
    cfg.model.seed = 17;
    return cfg;
}

RunOptions opts(const std::string& dir, int threads = 1) {
    RunOptions o;
    o.out_dir = dir;
    o.threads = threads;
    o.quiet = true;
    return o;
}

} // namespace

TEST_CASE("simulate writes one mask per replicate, identically across thread counts") {
    auto cfg = bump_run(5, 8, 101);
    std::string a = scratch(), b = scratch();
    CHECK(run_simulate(cfg, opts(a, 1)) == 0);
    CHECK(run_simulate(cfg, opts(b, 3)) == 0);

    for (uint32_t i = 0; i < 8; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "mask_%06u.vrbm", i);
        std::string pa = a + "/" + name, pb = b + "/" + name;
        REQUIRE(fs::exists(pa));
        CHECK(slurp(pa) == slurp(pb));
        // files hold exactly the replicate the model defines
        Mask m = read_vrbm(pa);
        CHECK(mask_xor(m, simulate(cfg.model, i)).count() == 0);
    }
    CHECK_FALSE(fs::exists(a + "/mask_000008.vrbm"));

    std::string meta = slurp(a + "/run_meta.txt");
    CHECK(meta.find("runner = simulate") != std::string::npos);
    CHECK(meta.find("row_order = (n, k, trial)") != std::string::npos);
}

TEST_CASE("estimate reproduces the two-strip field exactly") {
    // replicate A covers [0, 1/2), replicate B covers [1/4, 3/4); every
    // threshold quantity is a small rational
    GridSpec g{1, 2};
    Mask A(g), B(g);
    A.set(0);
    A.set(1);
    B.set(1);
    B.set(2);
    std::string masks = scratch();
    write_vrbm(A, masks + "/mask_000000.vrbm");
    write_vrbm(B, masks + "/mask_000001.vrbm");

    std::string out = scratch();
    CHECK(run_estimate(masks, -1, opts(out)) == 0);

    CHECK(slurp(out + "/thresholds.csv") ==
          "n,r,lambda_n,alpha_star_nr,alpha_star,beta_star,plateau_flag\n"
          "2,0.25,0.5,0.5,0.5,0.5,1\n");
    CHECK(slurp(out + "/fcurve.csv") ==
          "alpha,F_emp\n"
          "0,0.75\n"
          "0.5,0.25\n"
          "1,0\n");

    // the volume-matched mean keeps the always-covered cell plus the first
    // tie cell
    WeightedMask kn = read_vrbw(out + "/kn.vrbw");
    Mask expect(g);
    expect.set(0);
    expect.set(1);
    CHECK(kn == WeightedMask::from_mask(expect));
    WeightedMask knr = read_vrbw(out + "/knr.vrbw");
    CHECK(knr == WeightedMask::from_mask(expect));

    CoverageField f = read_vrbc(out + "/coverage.vrbc");
    CHECK(f.n == 2);
    CHECK(f.counts[1] == 2);
    CHECK(f.counts[3] == 0);

    // coarsening to mesh level 1 shifts the mesh column and the coarse
    // estimate, not the base-grid thresholds
    std::string out1 = scratch();
    CHECK(run_estimate(masks, 1, opts(out1)) == 0);
    auto row = split(lines_of(slurp(out1 + "/thresholds.csv"))[1]);
    REQUIRE(row.size() == 7);
    CHECK(row[1] == "0.5");  // r = 2^-1
    CHECK(row[3] == "0.5");  // coarse threshold estimate
    CHECK(row[4] == "0.5");
    WeightedMask knr1 = read_vrbw(out1 + "/knr.vrbw");
    CHECK(knr1.grid().level == 1);
    Mask coarse(GridSpec{1, 1});
    coarse.set(0);
    CHECK(knr1 == WeightedMask::from_mask(coarse));

    // error paths: over-fine mesh, empty directory, mixed grids
    CHECK_THROWS_WITH_AS(run_estimate(masks, 3, opts(scratch())),
                         doctest::Contains("exceeds the masks' grid level"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(run_estimate(scratch(), -1, opts(scratch())),
                         doctest::Contains("no .vrbm masks found"), ConfigError);
    Mask other(GridSpec{1, 3});
    other.set(0);
    write_vrbm(other, masks + "/mask_000002.vrbm");
    CHECK_THROWS_WITH_AS(run_estimate(masks, -1, opts(scratch())),
                         doctest::Contains("grid differs"), ConfigError);
}

TEST_CASE("fcurve rows are monotone and byte-reproducible") {
    auto cfg = bump_run(5, 50, 7);
    std::string a = scratch(), b = scratch();
    CHECK(run_fcurve(cfg, opts(a)) == 0);
    CHECK(run_fcurve(cfg, opts(b, 4)) == 0);
    CHECK(slurp(a + "/fcurve.csv") == slurp(b + "/fcurve.csv"));

    auto rows = lines_of(slurp(a + "/fcurve.csv"));
    REQUIRE(rows.size() == 52); // header + n+1 thresholds
    CHECK(rows[0] == "alpha,F_emp,F_oracle");
    double prev_e = 2.0, prev_o = 2.0;
    for (size_t i = 1; i < rows.size(); ++i) {
        auto f = split(rows[i]);
        REQUIRE(f.size() == 3);
        double fe = std::stod(f[1]), fo = std::stod(f[2]);
        CHECK(fe <= prev_e + 1e-12);
        CHECK(fo <= prev_o + 1e-12);
        CHECK(fe >= 0.0);
        CHECK(fe <= 1.0);
        prev_e = fe;
        prev_o = fo;
    }
    // at threshold 1 nothing exceeds: both curves end at zero
    auto last = split(rows.back());
    CHECK(last[1] == "0");
    CHECK(last[2] == "0");
}

TEST_CASE("boxdim counts the boundary of the simulated replicate") {
    // a certain atom with no germs: the replicate is the disk regardless
    // of seed, so the expected counts are computable here
    auto cfg = atom_disk_run(6, 1.0);
    std::string out = scratch();
    CHECK(run_boxdim(cfg, opts(out)) == 0);

    Mask disk = rasterize_ball(cfg.model.grid, P3{0.5, 0.5, 0.0}, 0.3);
    Mask bdry = boundary_cells(disk);
    std::vector<int> levels;
    for (int k = 0; k <= 6; ++k) levels.push_back(k);
    auto expect = box_counts(bdry, levels);

    auto rows = lines_of(slurp(out + "/boxdim.csv"));
    REQUIRE(rows.size() >= 9); // header + 7 levels + slope comment
    CHECK(rows[0] == "k,r,N_r,log2_N_r");
    for (int k = 0; k <= 6; ++k) {
        auto f = split(rows[size_t(k) + 1]);
        REQUIRE(f.size() == 4);
        CHECK(f[0] == std::to_string(k));
        CHECK(uint64_t(std::stoull(f[2])) == expect[size_t(k)].n_r);
    }
    std::string tail = rows.back();
    REQUIRE(tail.rfind("# slope = ", 0) == 0);
    double slope = std::stod(tail.substr(10));
    CHECK(slope > 0.7);
    CHECK(slope < 1.3);
    CHECK(slurp(out + "/run_meta.txt").find("boundary_cells = " +
                                            std::to_string(bdry.count())) !=
          std::string::npos);
}

TEST_CASE("consistency runs a joint schedule in fixed row order") {
    auto st = bump_run(4, 10, 1);
    st.model.model = ModelKind::Stationary;
    st.model.intensity.kind = IntensityKind::Constant;
    st.model.intensity.m0 = 50.0;
    st.model.radius = RadiusLaw::dirac(0.1);
    CHECK_THROWS_WITH_AS(run_consistency(st, opts(scratch())),
                         doctest::Contains("stationary"), ConfigError);

    auto bad = bump_run(5, 10, 1);
    bad.plan.n_schedule = {10, 20};
    bad.plan.k_schedule = {3};
    CHECK_THROWS_WITH_AS(run_consistency(bad, opts(scratch())),
                         doctest::Contains("equal length"), ConfigError);

    auto cfg = bump_run(5, 10, 9);
    cfg.plan.n_schedule = {10, 20};
    cfg.plan.k_schedule = {3, 4};
    cfg.plan.trials = 3;
    std::string a = scratch(), b = scratch();
    CHECK(run_consistency(cfg, opts(a)) == 0);
    CHECK(run_consistency(cfg, opts(b, 4)) == 0);
    CHECK(slurp(a + "/consistency.csv") == slurp(b + "/consistency.csv"));

    auto rows = lines_of(slurp(a + "/consistency.csv"));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "n,r,trial,delta_knr,delta_kn,alpha_star_nr,lambda_n");
    const char* order[6][3] = {{"10", "0.125", "0"}, {"10", "0.125", "1"},
                               {"10", "0.125", "2"}, {"20", "0.0625", "0"},
                               {"20", "0.0625", "1"}, {"20", "0.0625", "2"}};
    for (int i = 0; i < 6; ++i) {
        auto f = split(rows[size_t(i) + 1]);
        REQUIRE(f.size() == 7);
        CHECK(f[0] == order[i][0]);
        CHECK(f[1] == order[i][1]);
        CHECK(f[2] == order[i][2]);
        double dknr = std::stod(f[3]), dkn = std::stod(f[4]);
        CHECK(dknr >= 0.0);
        CHECK(dknr <= 1.0);
        CHECK(dkn >= 0.0);
        CHECK(dkn <= 1.0);
        double asnr = std::stod(f[5]);
        CHECK(asnr >= 0.0);
        CHECK(asnr <= 1.0);
    }
    std::string meta = slurp(a + "/run_meta.txt");
    CHECK(meta.find("oracle_alpha_star = ") != std::string::npos);
    CHECK(meta.find("trials = 3") != std::string::npos);
}

TEST_CASE("rate check holds for the proven exponent and fails for a wrong one") {
    auto st = bump_run(4, 10, 1);
    st.model.model = ModelKind::Stationary;
    st.model.intensity.kind = IntensityKind::Constant;
    st.model.intensity.m0 = 50.0;
    st.model.radius = RadiusLaw::dirac(0.1);
    CHECK_THROWS_AS(run_rate_check(st, opts(scratch())), ConfigError);

    auto cfg = bump_run(5, 0, 33);
    cfg.plan.n_schedule = {50, 100};
    cfg.plan.k_schedule = {4, 5};
    cfg.plan.trials = 4;
    std::string a = scratch(), b = scratch();
    CHECK(run_rate_check(cfg, opts(a)) == 0);
    CHECK(run_rate_check(cfg, opts(b, 2)) == 0);
    CHECK(slurp(a + "/rate.csv") == slurp(b + "/rate.csv"));

    auto rows = lines_of(slurp(a + "/rate.csv"));
    REQUIRE(rows.size() == 5); // header + 2x2 cells
    CHECK(rows[0] ==
          "n,r,alpha,mc_mean_delta,mc_stderr,best_bound,eps_star,"
          "bound_satisfied,plateau_warn");
    for (size_t i = 1; i < rows.size(); ++i) {
        auto f = split(rows[i]);
        REQUIRE(f.size() == 9);
        CHECK(f[7] == "1");
        CHECK(f[8] == "0");
        CHECK(std::stod(f[3]) <= std::stod(f[5]) + 2.0 * std::stod(f[4]) + 1e-12);
    }

    // a cubic mesh exponent overstates the boundary approximation rate of
    // a disk; the checker must flag the violation, not absorb it
    auto wrong = atom_disk_run(6, 0.7);
    wrong.plan.n_schedule = {400};
    wrong.plan.k_schedule = {4};
    wrong.plan.trials = 3;
    wrong.plan.kappa = 3.0;
    wrong.plan.eps_grid = {0.1};
    wrong.plan.alpha = 0.3;
    std::string w = scratch();
    CHECK(run_rate_check(wrong, opts(w)) == 3);
    auto wrows = lines_of(slurp(w + "/rate.csv"));
    REQUIRE(wrows.size() == 2);
    CHECK(split(wrows[1])[7] == "0");

    // a threshold sitting exactly on an atom plateau is reported; 0.75 is
    // exact in the oracle's quantization, 0.7 would land between steps
    auto plat = atom_disk_run(5, 0.75);
    plat.plan.n_schedule = {30};
    plat.plan.k_schedule = {4};
    plat.plan.trials = 2;
    plat.plan.alpha = 0.75;
    std::string p = scratch();
    run_rate_check(plat, opts(p));
    CHECK(split(lines_of(slurp(p + "/rate.csv"))[1])[8] == "1");
}

TEST_CASE("bracket summary covers the oracle interval") {
    auto cfg = bump_run(5, 0, 2);
    cfg.plan.n_schedule = {100};
    cfg.plan.k_schedule = {5};
    cfg.plan.trials = 20;
    std::string a = scratch(), b = scratch();
    CHECK(run_bracket(cfg, opts(a)) == 0);
    CHECK(run_bracket(cfg, opts(b, 4)) == 0);
    CHECK(slurp(a + "/bracket.csv") == slurp(b + "/bracket.csv"));

    auto rows = lines_of(slurp(a + "/bracket.csv"));
    REQUIRE(rows.size() == 21);
    CHECK(rows[0] == "n,r,trial,alpha_star_nr,alpha_star,beta_star,in_bracket");
    int inside = 0;
    for (size_t i = 1; i < rows.size(); ++i) {
        auto f = split(rows[i]);
        REQUIRE(f.size() == 7);
        double asnr = std::stod(f[3]);
        double lo = std::stod(f[4]) - cfg.plan.bracket_tol;
        double hi = std::stod(f[5]) + cfg.plan.bracket_tol;
        bool in = asnr >= lo && asnr <= hi;
        CHECK(f[6] == (in ? "1" : "0"));
        inside += in ? 1 : 0;
    }
    auto summary = lines_of(slurp(a + "/bracket_summary.csv"));
    REQUIRE(summary.size() == 2);
    CHECK(summary[0] == "n,r,fraction_in");
    CHECK(std::stod(split(summary[1])[2]) ==
          doctest::Approx(double(inside) / 20.0).epsilon(1e-9));
    CHECK(inside >= 18); // the estimator lands in the widened bracket

    // stationary models are allowed here: the interval degenerates to the
    // constant level
    auto st = bump_run(4, 0, 5);
    st.model.model = ModelKind::Stationary;
    st.model.intensity.kind = IntensityKind::Constant;
    st.model.intensity.m0 = 50.0;
    st.model.radius = RadiusLaw::dirac(0.1);
    st.plan.n_schedule = {30};
    st.plan.k_schedule = {4};
    st.plan.trials = 3;
    std::string s = scratch();
    CHECK(run_bracket(st, opts(s)) == 0);
    auto srow = split(lines_of(slurp(s + "/bracket.csv"))[1]);
    CHECK(std::stod(srow[4]) == doctest::Approx(0.7921204236).epsilon(2e-3));
    CHECK(std::stod(srow[5]) == doctest::Approx(0.7921204236).epsilon(2e-3));
}

TEST_CASE("runners create nested output directories") {
    auto cfg = bump_run(4, 2, 3);
    std::string base = scratch();
    std::string nested = base + "/a/b/c";
    CHECK(run_simulate(cfg, opts(nested)) == 0);
    CHECK(fs::exists(nested + "/mask_000001.vrbm"));
}
