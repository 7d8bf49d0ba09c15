// INI-style run configuration for the command-line tools.  Three sections:
//
//   [map]     type = linear | conjugated
//             matrix = a b c d            (integer entries, |det| = 1)
//             mode = x k1 k2 re im        (repeatable; displacement modes of
//             mode = y k1 k2 re im         the conjugating chart)
//   [params]  p = -1, -2                  (comma lists; cells are the cross
//             s = 1, 2                     product; q may replace s, q = s - p)
//             t = 2
//   [run]     N, grid, n_max, n_tr, seed, threads, kinds, formulas,
//             output, dump_matrix, zero_radius, residuals
//
// Parsing is strict: unknown keys, malformed values, and out-of-range
// numbers are reported with their line number.  Resource refusals (N above
// the dense budget) are a separate error type so the drivers can map them
// to a distinct exit code.
#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/fredholm.hpp"
#include "anosov/torus_map.hpp"
#include "anosov/transfer.hpp"

namespace anosov {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamCell {
    double p = -1, s = 1, t = 2;
};

struct RunConfig {
    // [map]
    std::string map_type = "linear";
    std::array<long long, 4> matrix{2, 1, 1, 1};
    std::vector<DisplacementMode> modes_x, modes_y;

    // [params]
    std::vector<double> p_list, s_list, q_list, t_list;

    // [run]
    int half_width = 16;
    int grid = 0;  // 0 = auto
    int n_max = 8;
    int n_tr = 10;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    bool dump_matrix = false;
    double zero_radius = 1.2;
    int residual_count = 32;
    std::vector<std::string> kinds{"L"};
    std::vector<BoundFormula> formulas;  // empty = all of them
    std::string output_dir = "runs";

    std::string text;  // raw config bytes, echoed into the manifest

    SmoothToralMap build_map() const {
        ToralAutomorphism aut(matrix[0], matrix[1], matrix[2], matrix[3]);
        if (map_type == "linear") return SmoothToralMap::linear(aut);
        return SmoothToralMap::conjugated(aut, ConjugacyDiffeo(modes_x, modes_y));
    }

    std::vector<ParamCell> cells() const {
        std::vector<ParamCell> out;
        for (double p : p_list) {
            std::vector<double> s_vals = s_list;
            for (double q : q_list) s_vals.push_back(p + q);
            for (double s : s_vals)
                for (double t : t_list) out.push_back({p, s, t});
        }
        return out;
    }

    OperatorKind kind_for(const std::string& name, double t) const {
        if (name == "L") return OperatorKind::L();
        if (name == "M") return OperatorKind::M();
        if (name == "Lt") return OperatorKind::Lt(t);
        if (name == "Mt") return OperatorKind::Mt(t);
        throw ConfigError("unknown operator kind '" + name + "'");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": field '" + key +
                          "': cannot parse '" + v + "' as a number");
    }
}

inline long long parse_int(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": field '" + key +
                          "': cannot parse '" + v + "' as an integer");
    }
}

inline std::vector<double> parse_list(const std::string& v, int line,
                                      const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split(v, ','))
        if (!item.empty()) out.push_back(parse_double(item, line, key));
    return out;
}

inline BoundFormula parse_formula(const std::string& name, int line) {
    static const std::pair<const char*, BoundFormula> table[] = {
        {"rho_infty", BoundFormula::rho_infty},
        {"rho_one", BoundFormula::rho_one},
        {"thm1", BoundFormula::thm1},
        {"thm2", BoundFormula::thm2},
        {"propL1_u", BoundFormula::propL1_u},
        {"propL1_s", BoundFormula::propL1_s},
        {"propL12", BoundFormula::propL12},
        {"appendix_Lt", BoundFormula::appendix_Lt},
        {"appendix_Mt", BoundFormula::appendix_Mt},
    };
    for (const auto& [n, f] : table)
        if (name == n) return f;
    throw ConfigError("line " + std::to_string(line) + ": unknown bound formula '" +
                      name + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.text = text;
    cfg.kinds.clear();

    std::istringstream is(text);
    std::string raw, section;
    int line_no = 0;
    bool matrix_seen = false;

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section != "map" && section != "params" && section != "run")
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unknown section [" + section + "]");
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                              "' before any [section]");

        if (section == "map") {
            if (key == "type") {
                if (value != "linear" && value != "conjugated")
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": map type must be linear or conjugated");
                cfg.map_type = value;
            } else if (key == "matrix") {
                std::istringstream ms(value);
                std::vector<std::string> parts;
                std::string tok;
                while (ms >> tok) parts.push_back(tok);
                if (parts.size() != 4)
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": matrix needs exactly 4 integer entries");
                for (int i = 0; i < 4; ++i)
                    cfg.matrix[static_cast<std::size_t>(i)] =
                        detail::parse_int(parts[static_cast<std::size_t>(i)],
                                          line_no, "matrix");
                matrix_seen = true;
            } else if (key == "mode") {
                std::istringstream ms(value);
                std::string comp;
                long long k1, k2;
                double re, im;
                if (!(ms >> comp >> k1 >> k2 >> re >> im) || (comp != "x" && comp != "y"))
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": mode needs 'x|y k1 k2 re im'");
                std::string rest;
                if (ms >> rest)
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": trailing junk after mode entry");
                DisplacementMode m{k1, k2, {re, im}};
                (comp == "x" ? cfg.modes_x : cfg.modes_y).push_back(m);
            } else {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unknown [map] key '" + key + "'");
            }
        } else if (section == "params") {
            if (key == "p")
                cfg.p_list = detail::parse_list(value, line_no, key);
            else if (key == "s")
                cfg.s_list = detail::parse_list(value, line_no, key);
            else if (key == "q")
                cfg.q_list = detail::parse_list(value, line_no, key);
            else if (key == "t")
                cfg.t_list = detail::parse_list(value, line_no, key);
            else
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unknown [params] key '" + key + "'");
        } else {  // run
            if (key == "N")
                cfg.half_width = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "grid")
                cfg.grid = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "n_max")
                cfg.n_max = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "n_tr")
                cfg.n_tr = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "seed") {
                try {
                    std::size_t pos = 0;
                    cfg.seed = std::stoull(value, &pos);
                    if (pos != value.size()) throw std::invalid_argument("junk");
                } catch (const std::exception&) {
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": field 'seed': cannot parse '" + value + "'");
                }
                cfg.seed_given = true;
            } else if (key == "threads")
                cfg.threads = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "dump_matrix") {
                if (value != "true" && value != "false")
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": dump_matrix must be true or false");
                cfg.dump_matrix = value == "true";
            } else if (key == "zero_radius")
                cfg.zero_radius = detail::parse_double(value, line_no, key);
            else if (key == "residuals")
                cfg.residual_count = static_cast<int>(detail::parse_int(value, line_no, key));
            else if (key == "kinds") {
                cfg.kinds.clear();
                for (const auto& k : detail::split(value, ','))
                    if (!k.empty()) cfg.kinds.push_back(k);
            } else if (key == "formulas") {
                cfg.formulas.clear();
                for (const auto& f : detail::split(value, ','))
                    if (!f.empty()) cfg.formulas.push_back(detail::parse_formula(f, line_no));
            } else if (key == "output")
                cfg.output_dir = value;
            else
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unknown [run] key '" + key + "'");
        }
    }

    if (cfg.map_type == "linear" && !(cfg.modes_x.empty() && cfg.modes_y.empty()))
        throw ConfigError("field 'mode': chart modes given for a linear map");
    if (cfg.map_type == "conjugated" && !matrix_seen)
        throw ConfigError("field 'matrix': conjugated maps need an explicit matrix");
    if (cfg.kinds.empty()) cfg.kinds.push_back("L");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

// Dense eigensolves cap N below the assembly budget: the solver holds
// several dim x dim copies, and refinement assembles once more at N + 8.
inline constexpr int kSpectrumHalfWidthBudget = 32;
inline constexpr int kSpectrumRefineStep = 8;

// Everything that must hold before a run starts.  ConfigError here is a
// usage failure; BudgetError is a resource refusal and nothing is written.
inline void validate_for(const RunConfig& cfg, const std::string& subcommand) {
    if (cfg.p_list.empty() || (cfg.s_list.empty() && cfg.q_list.empty()) ||
        cfg.t_list.empty())
        throw ConfigError("[params] must provide non-empty p, s (or q), and t lists");
    if (!cfg.s_list.empty() && !cfg.q_list.empty())
        throw ConfigError("[params] takes either s or q lists, not both");
    for (double p : cfg.p_list)
        if (!(p < 0))
            throw ConfigError("field 'p': exponents must be negative, got " +
                              std::to_string(p));
    for (double s : cfg.s_list)
        if (!(s > 0))
            throw ConfigError("field 's': exponents must be positive, got " +
                              std::to_string(s));
    for (double p : cfg.p_list)
        for (double q : cfg.q_list)
            if (!(p + q > 0))
                throw ConfigError("field 'q': p + q must be positive");
    for (double t : cfg.t_list)
        if (!(t > 1.0) || !std::isfinite(t))
            throw ConfigError("field 't': values must lie in (1, inf)");
    if (cfg.half_width < 1)
        throw ConfigError("field 'N': truncation must be at least 1");
    if (cfg.n_max < 1) throw ConfigError("field 'n_max': must be at least 1");
    if (cfg.n_tr < 1 || cfg.n_tr > kMaxPeriod)
        throw ConfigError("field 'n_tr': must lie in 1.." + std::to_string(kMaxPeriod));
    if (cfg.threads < 1) throw ConfigError("field 'threads': must be at least 1");
    if (!(cfg.zero_radius > 0))
        throw ConfigError("field 'zero_radius': must be positive");
    for (const auto& k : cfg.kinds)
        if (k != "L" && k != "M" && k != "Lt" && k != "Mt")
            throw ConfigError("field 'kinds': unknown operator kind '" + k + "'");

    if (subcommand == "spectrum" || subcommand == "determinant") {
        if (cfg.half_width > kSpectrumHalfWidthBudget)
            throw BudgetError("truncation " + std::to_string(cfg.half_width) +
                              " exceeds the dense eigensolver budget " +
                              std::to_string(kSpectrumHalfWidthBudget));
        for (double t : cfg.t_list)
            if (std::fabs(t - 2.0) > 1e-12)
                throw ConfigError("field 't': eigensolves need the t = 2 space");
    } else {
        AssemblyOptions opts;
        if (cfg.half_width > opts.max_half_width)
            throw BudgetError("truncation " + std::to_string(cfg.half_width) +
                              " exceeds the assembly budget " +
                              std::to_string(opts.max_half_width));
    }
}

}  // namespace anosov
