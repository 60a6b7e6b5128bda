#include "rset/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rset {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(uint8_t(s[a]))) ++a;
    while (b > a && std::isspace(uint8_t(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
    throw ConfigError(origin + ": " + msg);
}

double parse_double(const std::string& origin, const std::string& key,
                    const std::string& v) {
    errno = 0;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        fail(origin, "key \"" + key + "\": not a number: \"" + v + "\"");
    return x;
}

uint64_t parse_u64(const std::string& origin, const std::string& key,
                   const std::string& v) {
    errno = 0;
    char* end = nullptr;
    unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0' || v[0] == '-')
        fail(origin, "key \"" + key + "\": not a nonnegative integer: \"" + v + "\"");
    return x;
}

std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

std::array<double, 3> parse_point(const std::string& origin, const std::string& key,
                                  const std::string& v, int d) {
    auto parts = split(v, ',');
    if (int(parts.size()) != d)
        fail(origin, "key \"" + key + "\": expected " + std::to_string(d) +
                         " comma-separated coordinates, got \"" + v + "\"");
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int j = 0; j < d; ++j) x[j] = parse_double(origin, key, parts[j]);
    return x;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "model.kind",
        "intensity.kind", "intensity.m0", "intensity.m1", "intensity.amplitude",
        "intensity.center", "intensity.width",
        "radius.kind", "radius.r0", "radius.a", "radius.b",
        "atoms.count", "atoms.centers", "atoms.q", "atoms.r0",
        "grid.d", "grid.K",
        "run.seed", "run.n",
        "plan.n_schedule", "plan.k_schedule", "plan.trials", "plan.kappa",
        "plan.alpha", "plan.eps_grid", "plan.bracket_tol", "plan.levels",
    };
    return keys;
}

} // namespace

void ExperimentPlan::validate(const GridSpec& grid) const {
    if (n_schedule.empty()) throw ConfigError("plan.n_schedule: must be non-empty");
    if (k_schedule.empty()) throw ConfigError("plan.k_schedule: must be non-empty");
    for (uint32_t n : n_schedule)
        if (n == 0) throw ConfigError("plan.n_schedule: entries must be >= 1");
    for (int k : k_schedule)
        if (k < 0 || k > grid.level)
            throw ConfigError(
                "plan.k_schedule: levels must lie in [0, grid.K] (coarsening only)");
    if (trials == 0) throw ConfigError("plan.trials: must be >= 1");
    if (!(kappa > 0.0) || kappa > double(grid.d))
        throw ConfigError("plan.kappa: must lie in (0, d]");
    if (!(alpha >= 0.0) || alpha >= 1.0)
        throw ConfigError("plan.alpha: must lie in [0, 1)");
    if (eps_grid.empty()) throw ConfigError("plan.eps_grid: must be non-empty");
    for (double e : eps_grid)
        if (!(e > 0.0)) throw ConfigError("plan.eps_grid: entries must be positive");
    if (!(bracket_tol >= 0.0)) throw ConfigError("plan.bracket_tol: must be >= 0");
    for (int k : levels)
        if (k < 0 || k > grid.level)
            throw ConfigError("plan.levels: levels must lie in [0, grid.K]");
}

ParsedConfig parse_config(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // '#' only: ';' separates points inside atoms.centers
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(where, "unterminated section header \"" + line + "\"");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(where, "empty section header");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(where, "expected key = value, got \"" + line + "\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(where, "empty key");
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                fail(where, "key \"" + key + "\" appears before any [section]");
            key = section + "." + key;
        }
        if (!known_keys().count(key)) fail(where, "unknown key \"" + key + "\"");
        if (kv.count(key)) fail(where, "duplicate key \"" + key + "\"");
        kv[key] = value;
    }

    auto has = [&](const char* k) { return kv.count(k) != 0; };
    auto get = [&](const char* k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) fail(origin, std::string("missing required key \"") + k + "\"");
        return it->second;
    };

    ParsedConfig out;
    BooleanConfig& m = out.model;

    // grid first: point-valued keys need the dimension
    int d = int(parse_u64(origin, "grid.d", get("grid.d")));
    int K = int(parse_u64(origin, "grid.K", get("grid.K")));
    try {
        m.grid = GridSpec(d, K);
    } catch (const std::exception& e) {
        fail(origin, std::string("grid: ") + e.what());
    }

    const std::string& kind = get("model.kind");
    if (kind == "stationary") m.model = ModelKind::Stationary;
    else if (kind == "nonstationary") m.model = ModelKind::NonStationary;
    else if (kind == "atoms") m.model = ModelKind::Atoms;
    else
        fail(origin, "key \"model.kind\": expected stationary, nonstationary or "
                     "atoms, got \"" + kind + "\"");

    const std::string& ikind = get("intensity.kind");
    if (ikind == "constant") m.intensity.kind = IntensityKind::Constant;
    else if (ikind == "separable_bump") m.intensity.kind = IntensityKind::SeparableBump;
    else if (ikind == "gaussian_bump") m.intensity.kind = IntensityKind::GaussianBump;
    else
        fail(origin, "key \"intensity.kind\": expected constant, separable_bump or "
                     "gaussian_bump, got \"" + ikind + "\"");

    m.intensity.m0 = parse_double(origin, "intensity.m0", get("intensity.m0"));
    m.intensity.m1 = m.intensity.amplitude = 0.0;
    if (m.intensity.kind == IntensityKind::SeparableBump)
        m.intensity.m1 = parse_double(origin, "intensity.m1", get("intensity.m1"));
    else if (has("intensity.m1"))
        fail(origin, "key \"intensity.m1\": only meaningful for separable_bump");
    if (m.intensity.kind == IntensityKind::GaussianBump) {
        m.intensity.amplitude =
            parse_double(origin, "intensity.amplitude", get("intensity.amplitude"));
        m.intensity.center =
            parse_point(origin, "intensity.center", get("intensity.center"), d);
        m.intensity.width = parse_double(origin, "intensity.width", get("intensity.width"));
    } else if (has("intensity.amplitude") || has("intensity.center") ||
               has("intensity.width")) {
        fail(origin, "keys intensity.amplitude/center/width: only meaningful for "
                     "gaussian_bump");
    }

    const std::string& rkind = get("radius.kind");
    if (rkind == "dirac") {
        double r0 = parse_double(origin, "radius.r0", get("radius.r0"));
        if (has("radius.a") || has("radius.b"))
            fail(origin, "keys radius.a/b: only meaningful for uniform");
        m.radius = RadiusLaw{RadiusKind::Dirac, r0, r0};
    } else if (rkind == "uniform") {
        double a = parse_double(origin, "radius.a", get("radius.a"));
        double b = parse_double(origin, "radius.b", get("radius.b"));
        if (has("radius.r0"))
            fail(origin, "key \"radius.r0\": only meaningful for dirac");
        m.radius = RadiusLaw{RadiusKind::Uniform, a, b};
    } else {
        fail(origin, "key \"radius.kind\": expected dirac or uniform, got \"" +
                         rkind + "\"");
    }

    if (m.model == ModelKind::Atoms) {
        uint64_t count = parse_u64(origin, "atoms.count", get("atoms.count"));
        double q = parse_double(origin, "atoms.q", get("atoms.q"));
        m.atom_radius = parse_double(origin, "atoms.r0", get("atoms.r0"));
        auto pts = split(get("atoms.centers"), ';');
        if (pts.size() != count)
            fail(origin, "atoms.count says " + std::to_string(count) +
                             " but atoms.centers lists " + std::to_string(pts.size()));
        for (const std::string& p : pts)
            m.atoms.push_back(Atom{parse_point(origin, "atoms.centers", p, d), q});
    } else if (has("atoms.count") || has("atoms.centers") || has("atoms.q") ||
               has("atoms.r0")) {
        fail(origin, "keys atoms.*: only meaningful for model.kind = atoms");
    }

    if (has("run.seed")) m.seed = parse_u64(origin, "run.seed", kv["run.seed"]);
    m.n = uint32_t(parse_u64(origin, "run.n", get("run.n")));
    if (m.n == 0) fail(origin, "key \"run.n\": must be >= 1");

    ExperimentPlan& p = out.plan;
    if (has("plan.n_schedule")) {
        p.n_schedule.clear();
        for (const std::string& s : split(kv["plan.n_schedule"], ','))
            p.n_schedule.push_back(uint32_t(parse_u64(origin, "plan.n_schedule", s)));
    }
    if (has("plan.k_schedule")) {
        p.k_schedule.clear();
        for (const std::string& s : split(kv["plan.k_schedule"], ','))
            p.k_schedule.push_back(int(parse_u64(origin, "plan.k_schedule", s)));
    }
    if (has("plan.trials"))
        p.trials = uint32_t(parse_u64(origin, "plan.trials", kv["plan.trials"]));
    if (has("plan.kappa"))
        p.kappa = parse_double(origin, "plan.kappa", kv["plan.kappa"]);
    if (has("plan.alpha"))
        p.alpha = parse_double(origin, "plan.alpha", kv["plan.alpha"]);
    if (has("plan.eps_grid")) {
        p.eps_grid.clear();
        for (const std::string& s : split(kv["plan.eps_grid"], ','))
            p.eps_grid.push_back(parse_double(origin, "plan.eps_grid", s));
    }
    if (has("plan.bracket_tol"))
        p.bracket_tol = parse_double(origin, "plan.bracket_tol", kv["plan.bracket_tol"]);
    if (has("plan.levels")) {
        p.levels.clear();
        for (const std::string& s : split(kv["plan.levels"], ','))
            p.levels.push_back(int(parse_u64(origin, "plan.levels", s)));
    }

    try {
        m.validate();
    } catch (const std::exception& e) {
        fail(origin, e.what());
    }
    p.validate(m.grid);
    return out;
}

ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace rset
