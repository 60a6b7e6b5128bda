#include "rset/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "rset/boolean_model.hpp"
#include "rset/boxdim.hpp"
#include "rset/mask_io.hpp"
#include "rset/oracle_field.hpp"
#include "rset/parallel.hpp"
#include "rset/vorobev.hpp"

namespace fs = std::filesystem;

namespace rset {

namespace {

constexpr int kOracleBits = 20;

// substream namespaces, one per runner, so reordering experiments in a
// script never correlates their draws
constexpr uint64_t kUnitFcurve = 0x66637576;
constexpr uint64_t kUnitConsistency = 0x636f6e76;
constexpr uint64_t kUnitRate = 0x72617465;
constexpr uint64_t kUnitBracket = 0x6272636b;
constexpr uint64_t kUnitBoxdim = 0x62786469;

std::string fmt9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError(dir + ": cannot create output directory");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    return out;
}

const char* model_name(ModelKind m) {
    switch (m) {
    case ModelKind::Stationary: return "stationary";
    case ModelKind::NonStationary: return "nonstationary";
    case ModelKind::Atoms: return "atoms";
    }
    return "?";
}

void write_meta(const RunOptions& opt, const ParsedConfig* cfg,
                const std::string& runner,
                const std::vector<std::pair<std::string, std::string>>& extra) {
    auto out = open_out(opt.out_dir, "run_meta.txt");
    out << "runner = " << runner << "\n";
    if (cfg) {
        const BooleanConfig& m = cfg->model;
        out << "model = " << model_name(m.model) << "\n";
        out << "grid = d" << m.grid.d << " K" << m.grid.level << "\n";
        out << "seed = " << m.seed << "\n";
        out << "n = " << m.n << "\n";
    }
    out << "threads = " << opt.threads << "\n";
    for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
    out << "row_order = (n, k, trial)\n";
    out << "value_quantization_bits = " << kOracleBits << "\n";
    out << "note = trend, bracket and improvement thresholds are finite-sample "
           "harness choices; the underlying results are asymptotic\n";
}

std::string schedule_str(const std::vector<uint32_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string schedule_str_i(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// n replicates of cfg with the given master seed, accumulated
CoverageField simulate_field(const BooleanConfig& cfg, uint64_t seed, uint32_t n) {
    BooleanConfig c = cfg;
    c.seed = seed;
    CoverageField field(c.grid);
    for (uint32_t i = 0; i < n; ++i) accumulate(field, simulate(c, i));
    return field;
}

// exact mean of the quantized oracle values: the coverage-integral volume
// E lambda(X) of the discretized model
Rational quantized_mean_volume(const QuantizedField& f) {
    uint64_t sum = 0;
    for (uint32_t v : f.values) sum += v;
    return Rational(int128(sum),
                    int128(1) << (f.value_bits + f.grid.level * f.grid.d));
}

} // namespace

int run_simulate(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    ensure_dir(opt.out_dir);
    const BooleanConfig& m = cfg.model;

    parallel_for(m.n, opt.threads, [&](uint64_t i) {
        char name[32];
        std::snprintf(name, sizeof name, "mask_%06llu.vrbm",
                      static_cast<unsigned long long>(i));
        Mask mask = simulate(m, i);
        write_vrbm(mask, (fs::path(opt.out_dir) / name).string());
    });

    write_meta(opt, &cfg, "simulate", {{"replicates", std::to_string(m.n)}});
    if (!opt.quiet)
        std::cout << "simulate: wrote " << m.n << " masks to " << opt.out_dir
                  << "\n";
    return 0;
}

int run_estimate(const std::string& masks_dir, int mesh_level,
                 const RunOptions& opt) {
    std::vector<std::string> paths;
    {
        std::error_code ec;
        fs::directory_iterator it(masks_dir, ec), end;
        if (ec) throw ConfigError(masks_dir + ": cannot list mask directory");
        for (; it != end; ++it)
            if (it->path().extension() == ".vrbm")
                paths.push_back(it->path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw ConfigError(masks_dir + ": no .vrbm masks found");

    CoverageField field;
    for (size_t i = 0; i < paths.size(); ++i) {
        Mask m = read_vrbm(paths[i]);
        if (i == 0) field = CoverageField(m.grid());
        if (m.grid() != field.grid)
            throw ConfigError(paths[i] + ": grid differs from the first mask");
        accumulate(field, m);
    }

    int base = field.grid.level;
    if (mesh_level < 0) mesh_level = base;
    if (mesh_level > base)
        throw ConfigError("mesh level " + std::to_string(mesh_level) +
                          " exceeds the masks' grid level " + std::to_string(base) +
                          " (coarsening only)");

    ensure_dir(opt.out_dir);
    Rational lambda_n = empirical_mean_volume(field);
    SurvivalCurve curve = survival_curve(field);
    ThresholdReport rep = thresholds(curve, lambda_n);
    Rational asnr = alpha_star_nr(field, mesh_level, lambda_n);
    WeightedMask kn = kovyazin_mean(field, lambda_n);
    WeightedMask knr = k_nr(field, mesh_level, lambda_n);

    write_vrbc(field, (fs::path(opt.out_dir) / "coverage.vrbc").string());
    write_vrbw(kn, (fs::path(opt.out_dir) / "kn.vrbw").string());
    write_vrbw(knr, (fs::path(opt.out_dir) / "knr.vrbw").string());

    {
        auto out = open_out(opt.out_dir, "thresholds.csv");
        out << "n,r,lambda_n,alpha_star_nr,alpha_star,beta_star,plateau_flag\n";
        out << field.n << "," << fmt9(std::ldexp(1.0, -mesh_level)) << ","
            << fmt9(lambda_n.to_double()) << "," << fmt9(asnr.to_double()) << ","
            << fmt9(rep.alpha_star.to_double()) << ","
            << fmt9(rep.beta_star.to_double()) << "," << (rep.plateau_flag ? 1 : 0)
            << "\n";
    }
    {
        auto out = open_out(opt.out_dir, "fcurve.csv");
        out << "alpha,F_emp\n";
        for (uint32_t j = 0; j <= field.n; ++j) {
            Rational a(int128(j), int128(field.n));
            out << fmt9(a.to_double()) << "," << fmt9(curve.eval(a).to_double())
                << "\n";
        }
    }

    write_meta(opt, nullptr, "estimate",
               {{"masks", std::to_string(paths.size())},
                {"grid", "d" + std::to_string(field.grid.d) + " K" +
                             std::to_string(base)},
                {"mesh_level", std::to_string(mesh_level)}});
    if (!opt.quiet)
        std::cout << "estimate: " << paths.size() << " masks, lambda_n = "
                  << fmt9(lambda_n.to_double()) << ", alpha_star_nr = "
                  << fmt9(asnr.to_double()) << "\n";
    return 0;
}

int run_fcurve(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    ensure_dir(opt.out_dir);
    const BooleanConfig& m = cfg.model;

    auto oracle = oracle_coverage_field(m, kOracleBits);
    SurvivalCurve ocurve = survival_curve(*oracle);

    CoverageField field = simulate_field(m, m.seed, m.n);
    SurvivalCurve curve = survival_curve(field);

    {
        auto out = open_out(opt.out_dir, "fcurve.csv");
        out << "alpha,F_emp,F_oracle\n";
        for (uint32_t j = 0; j <= m.n; ++j) {
            Rational a(int128(j), int128(m.n));
            out << fmt9(a.to_double()) << "," << fmt9(curve.eval(a).to_double())
                << "," << fmt9(ocurve.eval(a).to_double()) << "\n";
        }
    }

    write_meta(opt, &cfg, "fcurve", {{"oracle", "quantized analytic coverage"}});
    if (!opt.quiet) std::cout << "fcurve: wrote " << (m.n + 1) << " rows\n";
    return 0;
}

int run_boxdim(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    ensure_dir(opt.out_dir);
    const BooleanConfig& m = cfg.model;

    BooleanConfig c = m;
    c.seed = substream_seed(m.seed, kUnitBoxdim, 0);
    Mask rep = simulate(c, 0);
    Mask bdry = boundary_cells(rep);

    std::vector<int> levels = cfg.plan.levels;
    if (levels.empty())
        for (int k = 0; k <= m.grid.level; ++k) levels.push_back(k);

    auto rows = box_counts(bdry, levels);
    auto out = open_out(opt.out_dir, "boxdim.csv");
    out << "k,r,N_r,log2_N_r\n";
    for (const auto& row : rows) {
        out << row.k << "," << fmt9(row.r) << "," << row.n_r << ",";
        if (row.n_r > 0) out << fmt9(std::log2(double(row.n_r)));
        out << "\n";
    }
    try {
        BoxCountReport fit = estimate_box_dim(rows, m.grid.d);
        out << "# slope = " << fmt9(fit.slope) << ", rss = " << fmt9(fit.rss)
            << ", fit_levels = [" << fit.fit_lo << ", " << fit.fit_hi << "]\n";
        if (!opt.quiet)
            std::cout << "boxdim: slope = " << fmt9(fit.slope) << "\n";
    } catch (const std::exception& e) {
        out << "# slope unavailable: " << e.what() << "\n";
        if (!opt.quiet) std::cout << "boxdim: slope unavailable: " << e.what() << "\n";
    }

    write_meta(opt, &cfg, "boxdim",
               {{"levels", schedule_str_i(levels)},
                {"boundary_cells", std::to_string(bdry.count())}});
    return 0;
}

int run_consistency(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    const BooleanConfig& m = cfg.model;
    if (m.model == ModelKind::Stationary)
        throw ConfigError(
            "consistency run rejects a stationary model: its coverage function "
            "is constant, so the tie mass lambda{p = alpha_star} is the whole "
            "cube and the regularity hypothesis behind the mean-shape limits "
            "fails");
    const ExperimentPlan& plan = cfg.plan;
    if (plan.n_schedule.size() != plan.k_schedule.size())
        throw ConfigError(
            "consistency runs refine n and the mesh jointly: plan.n_schedule "
            "and plan.k_schedule must have equal length");
    ensure_dir(opt.out_dir);

    auto oracle = oracle_coverage_field(m, kOracleBits);
    Rational target = quantized_mean_volume(*oracle);
    OracleExpectation ev = vorobev_from_oracle(*oracle, target);

    const size_t pairs = plan.n_schedule.size();
    const uint32_t trials = plan.trials;
    struct Row {
        uint32_t n;
        int k;
        uint32_t trial;
        double delta_knr, delta_kn, alpha_star_nr, lambda_n;
    };
    std::vector<Row> rows(pairs * trials);

    parallel_for(rows.size(), opt.threads, [&](uint64_t u) {
        size_t pi = u / trials;
        uint32_t trial = uint32_t(u % trials);
        uint32_t n = plan.n_schedule[pi];
        int k = plan.k_schedule[pi];
        CoverageField field =
            simulate_field(m, substream_seed(m.seed, kUnitConsistency, u), n);
        Rational lambda_n = empirical_mean_volume(field);
        WeightedMask kn = kovyazin_mean(field, lambda_n);
        WeightedMask knr = k_nr(field, k, lambda_n);
        Row& r = rows[u];
        r.n = n;
        r.k = k;
        r.trial = trial;
        r.delta_kn = symm_diff_volume(kn, ev.shape).to_double();
        r.delta_knr =
            symm_diff_volume(refine(knr, m.grid.level), ev.shape).to_double();
        r.alpha_star_nr = alpha_star_nr(field, k, lambda_n).to_double();
        r.lambda_n = lambda_n.to_double();
    });

    auto out = open_out(opt.out_dir, "consistency.csv");
    out << "n,r,trial,delta_knr,delta_kn,alpha_star_nr,lambda_n\n";
    for (const Row& r : rows)
        out << r.n << "," << fmt9(std::ldexp(1.0, -r.k)) << "," << r.trial << ","
            << fmt9(r.delta_knr) << "," << fmt9(r.delta_kn) << ","
            << fmt9(r.alpha_star_nr) << "," << fmt9(r.lambda_n) << "\n";

    write_meta(opt, &cfg, "consistency",
               {{"n_schedule", schedule_str(plan.n_schedule)},
                {"k_schedule", schedule_str_i(plan.k_schedule)},
                {"trials", std::to_string(trials)},
                {"oracle_alpha_star", fmt9(ev.report.alpha_star.to_double())},
                {"oracle_target_volume", fmt9(target.to_double())}});
    if (!opt.quiet)
        std::cout << "consistency: " << rows.size() << " rows over " << pairs
                  << " schedule points\n";
    return 0;
}

int run_rate_check(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    const BooleanConfig& m = cfg.model;
    if (m.model == ModelKind::Stationary)
        throw ConfigError(
            "rate check needs a spatially varying coverage oracle; the "
            "stationary level is a single constant and its level sets are "
            "degenerate");
    const ExperimentPlan& plan = cfg.plan;
    ensure_dir(opt.out_dir);

    auto oracle = oracle_coverage_field(m, kOracleBits);
    SurvivalCurve ocurve = survival_curve(*oracle);
    Rational alpha = Rational::from_double(plan.alpha);
    Mask q_alpha = level_set(*oracle, alpha, true);
    bool plateau_warn = !ocurve.mass_at(alpha).is_zero();

    const size_t cells = plan.n_schedule.size() * plan.k_schedule.size();
    const uint32_t trials = plan.trials;
    std::vector<double> deltas(cells * trials);

    parallel_for(deltas.size(), opt.threads, [&](uint64_t u) {
        size_t cell = u / trials;
        uint32_t n = plan.n_schedule[cell / plan.k_schedule.size()];
        int k = plan.k_schedule[cell % plan.k_schedule.size()];
        CoverageField field =
            simulate_field(m, substream_seed(m.seed, kUnitRate, u), n);
        Mask qr = level_set_grid(field, alpha, k, true);
        deltas[u] = symm_diff_volume(refine(qr, m.grid.level), q_alpha).to_double();
    });

    auto out = open_out(opt.out_dir, "rate.csv");
    out << "n,r,alpha,mc_mean_delta,mc_stderr,best_bound,eps_star,"
           "bound_satisfied,plateau_warn\n";
    bool all_ok = true;
    size_t cell = 0;
    for (uint32_t n : plan.n_schedule)
        for (int k : plan.k_schedule) {
            double mean = 0.0;
            for (uint32_t t = 0; t < trials; ++t) mean += deltas[cell * trials + t];
            mean /= double(trials);
            double var = 0.0;
            for (uint32_t t = 0; t < trials; ++t) {
                double dd = deltas[cell * trials + t] - mean;
                var += dd * dd;
            }
            var = trials > 1 ? var / double(trials - 1) : 0.0;
            double se = std::sqrt(var / double(trials));

            double r = std::ldexp(1.0, -k);
            double best = 0.0, eps_star = 0.0;
            bool first = true;
            for (double eps : plan.eps_grid) {
                double fwin =
                    (ocurve.eval(Rational::from_double(plan.alpha - eps)) -
                     ocurve.eval(Rational::from_double(plan.alpha + eps)))
                        .to_double();
                double bound =
                    std::pow(r, plan.kappa) +
                    2.0 * std::exp(-2.0 * double(n) * eps * eps) + fwin;
                if (first || bound < best) {
                    best = bound;
                    eps_star = eps;
                    first = false;
                }
            }
            bool ok = mean <= best + 2.0 * se;
            all_ok = all_ok && ok;
            out << n << "," << fmt9(r) << "," << fmt9(plan.alpha) << ","
                << fmt9(mean) << "," << fmt9(se) << "," << fmt9(best) << ","
                << fmt9(eps_star) << "," << (ok ? 1 : 0) << ","
                << (plateau_warn ? 1 : 0) << "\n";
            ++cell;
        }

    write_meta(opt, &cfg, "rate",
               {{"n_schedule", schedule_str(plan.n_schedule)},
                {"k_schedule", schedule_str_i(plan.k_schedule)},
                {"trials", std::to_string(trials)},
                {"kappa", fmt9(plan.kappa)},
                {"alpha", fmt9(plan.alpha)},
                {"mc_slack", "2 standard errors"}});
    if (!opt.quiet)
        std::cout << "rate: " << cells << " cells, "
                  << (all_ok ? "bound satisfied everywhere"
                             : "BOUND VIOLATION beyond MC slack")
                  << "\n";
    return all_ok ? 0 : 3;
}

int run_bracket(const ParsedConfig& cfg, const RunOptions& opt) {
    cfg.model.validate();
    const BooleanConfig& m = cfg.model;
    const ExperimentPlan& plan = cfg.plan;
    ensure_dir(opt.out_dir);

    auto oracle = oracle_coverage_field(m, kOracleBits);
    SurvivalCurve ocurve = survival_curve(*oracle);
    Rational target = quantized_mean_volume(*oracle);
    ThresholdReport rep = thresholds(ocurve, target);
    double astar = rep.alpha_star.to_double();
    double bstar = rep.beta_star.to_double();

    const size_t cells = plan.n_schedule.size() * plan.k_schedule.size();
    const uint32_t trials = plan.trials;
    std::vector<double> asnr(cells * trials);

    parallel_for(asnr.size(), opt.threads, [&](uint64_t u) {
        size_t cell = u / trials;
        uint32_t n = plan.n_schedule[cell / plan.k_schedule.size()];
        int k = plan.k_schedule[cell % plan.k_schedule.size()];
        CoverageField field =
            simulate_field(m, substream_seed(m.seed, kUnitBracket, u), n);
        asnr[u] =
            alpha_star_nr(field, k, empirical_mean_volume(field)).to_double();
    });

    auto out = open_out(opt.out_dir, "bracket.csv");
    out << "n,r,trial,alpha_star_nr,alpha_star,beta_star,in_bracket\n";
    auto summary = open_out(opt.out_dir, "bracket_summary.csv");
    summary << "n,r,fraction_in\n";
    size_t cell = 0;
    for (uint32_t n : plan.n_schedule)
        for (int k : plan.k_schedule) {
            double r = std::ldexp(1.0, -k);
            uint32_t inside = 0;
            for (uint32_t t = 0; t < trials; ++t) {
                double a = asnr[cell * trials + t];
                bool in = a >= astar - plan.bracket_tol &&
                          a <= bstar + plan.bracket_tol;
                inside += in ? 1 : 0;
                out << n << "," << fmt9(r) << "," << t << "," << fmt9(a) << ","
                    << fmt9(astar) << "," << fmt9(bstar) << "," << (in ? 1 : 0)
                    << "\n";
            }
            summary << n << "," << fmt9(r) << ","
                    << fmt9(double(inside) / double(trials)) << "\n";
            ++cell;
        }

    write_meta(opt, &cfg, "bracket",
               {{"n_schedule", schedule_str(plan.n_schedule)},
                {"k_schedule", schedule_str_i(plan.k_schedule)},
                {"trials", std::to_string(trials)},
                {"tolerance", fmt9(plan.bracket_tol)},
                {"oracle_alpha_star", fmt9(astar)},
                {"oracle_beta_star", fmt9(bstar)},
                {"oracle_plateau", rep.plateau_flag ? "1" : "0"}});
    if (!opt.quiet) std::cout << "bracket: " << cells << " cells\n";
    return 0;
}

} // namespace rset
