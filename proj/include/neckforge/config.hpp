#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "neckforge/errors.hpp"

namespace neckforge {

inline constexpr const char* toolkit_version = "1.0.0";
inline constexpr int config_format_version = 1;

enum class Command { Symbol, Indicial, CheckLemma, Green, ExtensionValidate, Glue, Solve, Accept };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
    static const std::vector<std::pair<Command, std::string>> names = {
        {Command::Symbol, "symbol"},        {Command::Indicial, "indicial"},
        {Command::CheckLemma, "check-lemma"}, {Command::Green, "green"},
        {Command::ExtensionValidate, "extension-validate"},
        {Command::Glue, "glue"},            {Command::Solve, "solve"},
        {Command::Accept, "accept"}};
    return names;
}

inline std::string to_string(Command c) {
    for (const auto& [cmd, name] : command_names()) {
        if (cmd == c) return name;
    }
    return "?";
}

inline std::optional<Command> parse_command(std::string_view name) {
    for (const auto& [cmd, n] : command_names()) {
        if (n == name) return cmd;
    }
    return std::nullopt;
}

namespace config {

enum class Kind { Int, Real, OptReal, IntList, RealList, RealGrid, Choice, Text, Flag };

struct KeySpec {
    std::string key;
    Kind kind = Kind::Real;
    std::string fallback;
    std::string help;
    std::vector<std::string> choices = {};
};

/// Keys every command accepts.
inline std::vector<KeySpec> common_keys() {
    return {
        {"output", Kind::Text, "", "output path (stdout when empty)"},
        {"threads", Kind::Int, "0", "worker threads (0: NECKFORGE_THREADS or all cores)"},
        {"seed", Kind::Int, "20240601", "seed for randomized checks"},
        {"deterministic", Kind::Flag, "false", "omit the timestamp from emitted headers"},
    };
}

inline std::vector<KeySpec> command_keys(Command c) {
    std::vector<KeySpec> k;
    switch (c) {
    case Command::Symbol:
        k = {{"n", Kind::IntList, "3", "dimensions, e.g. 3 or 2..6"},
             {"gamma", Kind::Real, "0.5", "fractional order"},
             {"m", Kind::IntList, "0..4", "modes, e.g. 0..4"},
             {"xi", Kind::RealGrid, "0:0.5:4", "frequencies: a:h:b or a list"}};
        break;
    case Command::Indicial:
        k = {{"n", Kind::IntList, "3", "dimensions"},
             {"gamma", Kind::Real, "0.5", "fractional order"},
             {"m", Kind::IntList, "0..4", "modes"},
             {"j_max", Kind::Int, "3", "highest root index"},
             {"tau_max", Kind::Real, "20", "imaginary extent of the search box"},
             {"tol", Kind::Real, "1e-10", "root tolerance"}};
        break;
    case Command::CheckLemma:
        k = {{"n", Kind::IntList, "2..5", "dimensions"},
             {"m_max", Kind::Int, "6", "highest mode"},
             {"j_max", Kind::Int, "3", "highest root index"},
             {"tol", Kind::Real, "1e-10", "root tolerance"}};
        break;
    case Command::Green:
        k = {{"n", Kind::Int, "3", "dimension"},
             {"m", Kind::Int, "0", "mode"},
             {"input", Kind::Text, "", "CSV with columns s,value"},
             {"delta", Kind::Real, "0.5", "decay rate at +infinity"},
             {"delta0", Kind::Real, "0.5", "decay rate at -infinity"}};
        break;
    case Command::ExtensionValidate:
        k = {{"n", Kind::IntList, "2..3", "dimensions"},
             {"m", Kind::IntList, "0..4", "modes"},
             {"xi", Kind::RealGrid, "0,0.5,1,2,4", "frequencies"},
             {"phi_grid", Kind::Int, "2048", "radial resolution"},
             {"scheme", Kind::Choice, "ode", "ode or fd2d", {"ode", "fd2d"}}};
        break;
    case Command::Glue:
        k = {{"n", Kind::Int, "3", "dimension"},
             {"epsilon", Kind::Real, "0.01", "neck parameter in (0, 0.25)"},
             {"sweep", Kind::Flag, "false", "run the decay study over eps"},
             {"eps", Kind::RealList, "0.1,0.05,0.025,0.0125,0.00625", "sweep values"},
             {"mu", Kind::Real, "-0.5", "weight exponent"},
             {"delta", Kind::OptReal, "", "chart radius (empty: epsilon^(1/4))"},
             {"cutoff_width", Kind::Real, "1", "half-width of the neck cutoff"},
             {"curvature_scale", Kind::Real, "1", "summand curvature in chart units"},
             {"ds", Kind::Real, "0.02", "grid step"},
             {"pad", Kind::Real, "30", "grid padding beyond the caps"},
             {"weight", Kind::Choice, "centered", "centered or literal", {"centered", "literal"}}};
        break;
    case Command::Solve:
        k = {{"background", Kind::Choice, "cylinder", "cylinder or ball", {"cylinder", "ball"}},
             {"n", Kind::Int, "3", "dimension"},
             {"L", Kind::Real, "0", "period (0: non-resonant default)"},
             {"mmax", Kind::Int, "8", "highest harmonic degree"},
             {"ns", Kind::Int, "64", "samples per period"},
             {"amp", Kind::Real, "0.01", "perturbation amplitude"},
             {"mode", Kind::Int, "1", "perturbed harmonic degree"},
             {"wave", Kind::Int, "1", "perturbation wave number in s"},
             {"method", Kind::Choice, "newton", "newton or fixed-point", {"newton", "fixed-point"}},
             {"tol", Kind::Real, "1e-10", "residual tolerance"},
             {"max_iter", Kind::Int, "60", "iteration cap"}};
        break;
    case Command::Accept:
        k = {{"criteria", Kind::IntList, "1..10", "criteria to run"}};
        break;
    }
    for (auto& c2 : common_keys()) k.push_back(std::move(c2));
    return k;
}

inline const std::set<std::string>& all_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> out;
        for (const auto& [cmd, name] : command_names()) {
            for (const auto& k : command_keys(cmd)) out.insert(k.key);
        }
        return out;
    }();
    return keys;
}

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool valid_key(const std::string& k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
    });
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline std::optional<double> to_real(const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long> to_int(const std::string& s) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace detail

/// Line-oriented `key = value` text with `#` comments and `[command]` sections.
inline std::vector<Entry> parse_text(const std::string& text) {
    std::vector<Entry> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string t = detail::trim(raw);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError("unterminated section header", line);
            const std::string name = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (!parse_command(name)) throw ParseError("unknown section [" + name + "]", line);
            section = name;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        Entry e{section, detail::trim(std::string_view(t).substr(0, eq)), detail::trim(std::string_view(t).substr(eq + 1)),
                line};
        if (!detail::valid_key(e.key)) throw ParseError("malformed key '" + e.key + "'", line);
        if (!seen.insert({section, e.key}).second) throw ParseError("duplicate key '" + e.key + "'", line);
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<Entry> parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

} // namespace config

/// Validated parameters of one command invocation.
struct RunConfig {
    Command command = Command::Accept;
    /// Every key of the command, resolved (file, then flags, then defaults).
    std::map<std::string, std::string> values;
    int format_version = config_format_version;

    const std::string& raw(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) throw ValidationError(key, "not a parameter of " + to_string(command));
        return it->second;
    }
    long get_int(const std::string& key) const {
        const auto v = config::detail::to_int(raw(key));
        if (!v) throw ValidationError(key, "expected an integer, got '" + raw(key) + "'");
        return *v;
    }
    double get_real(const std::string& key) const {
        const auto v = config::detail::to_real(raw(key));
        if (!v) throw ValidationError(key, "expected a number, got '" + raw(key) + "'");
        return *v;
    }
    std::optional<double> get_opt_real(const std::string& key) const {
        if (raw(key).empty()) return std::nullopt;
        return get_real(key);
    }
    bool get_flag(const std::string& key) const {
        const std::string& v = raw(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ValidationError(key, "expected true or false, got '" + v + "'");
    }
    const std::string& get_text(const std::string& key) const { return raw(key); }

    /// "a..b", "a" or "a,b,c".
    std::vector<int> get_int_list(const std::string& key) const {
        const std::string& v = raw(key);
        std::vector<int> out;
        if (const auto dots = v.find(".."); dots != std::string::npos) {
            const auto lo = config::detail::to_int(config::detail::trim(v.substr(0, dots)));
            const auto hi = config::detail::to_int(config::detail::trim(v.substr(dots + 2)));
            if (!lo || !hi || *hi < *lo || *hi - *lo > 10000) throw ValidationError(key, "bad range '" + v + "'");
            for (long i = *lo; i <= *hi; ++i) out.push_back(static_cast<int>(i));
            return out;
        }
        for (const auto& part : config::detail::split(v, ',')) {
            const auto x = config::detail::to_int(part);
            if (!x) throw ValidationError(key, "bad integer '" + part + "'");
            out.push_back(static_cast<int>(*x));
        }
        if (out.empty()) throw ValidationError(key, "empty list");
        return out;
    }

    /// Comma list of reals.
    std::vector<double> get_real_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& part : config::detail::split(raw(key), ',')) {
            const auto x = config::detail::to_real(part);
            if (!x) throw ValidationError(key, "bad number '" + part + "'");
            out.push_back(*x);
        }
        if (out.empty()) throw ValidationError(key, "empty list");
        return out;
    }

    /// "a:h:b" (inclusive) or a comma list.
    std::vector<double> get_real_grid(const std::string& key) const {
        const std::string& v = raw(key);
        if (v.find(':') == std::string::npos) return get_real_list(key);
        const auto parts = config::detail::split(v, ':');
        if (parts.size() != 3) throw ValidationError(key, "expected start:step:stop, got '" + v + "'");
        const auto a = config::detail::to_real(parts[0]);
        const auto h = config::detail::to_real(parts[1]);
        const auto b = config::detail::to_real(parts[2]);
        if (!a || !h || !b || !(*h > 0.0) || *b < *a) throw ValidationError(key, "bad grid '" + v + "'");
        const long count = std::lround(std::floor((*b - *a) / *h + 1e-9)) + 1;
        if (count > 1000000) throw ValidationError(key, "grid too large");
        std::vector<double> out;
        for (long i = 0; i < count; ++i) out.push_back(*a + *h * static_cast<double>(i));
        return out;
    }
};

namespace config {

namespace detail {

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ValidationError(key, what);
}

inline void check_kind(const RunConfig& rc, const KeySpec& spec) {
    switch (spec.kind) {
    case Kind::Int: rc.get_int(spec.key); break;
    case Kind::Real: rc.get_real(spec.key); break;
    case Kind::OptReal: rc.get_opt_real(spec.key); break;
    case Kind::IntList: rc.get_int_list(spec.key); break;
    case Kind::RealList: rc.get_real_list(spec.key); break;
    case Kind::RealGrid: rc.get_real_grid(spec.key); break;
    case Kind::Flag: rc.get_flag(spec.key); break;
    case Kind::Text: break;
    case Kind::Choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), rc.raw(spec.key)) == spec.choices.end()) {
            throw ValidationError(spec.key, "unknown choice '" + rc.raw(spec.key) + "'");
        }
        break;
    }
}

inline bool in_open(double x, double lo, double hi) { return x > lo && x < hi; }

/// Range rules that do not need the numerical modules.
inline void check_ranges(const RunConfig& rc) {
    const auto has = [&](const char* k) { return rc.values.count(k) > 0; };
    require(rc.get_int("threads") >= 0, "threads", "must be >= 0");
    require(rc.get_int("seed") >= 0, "seed", "must be >= 0");
    std::vector<int> ns;
    if (has("n")) {
        ns = rc.command == Command::Symbol || rc.command == Command::Indicial || rc.command == Command::CheckLemma ||
                     rc.command == Command::ExtensionValidate
                 ? rc.get_int_list("n")
                 : std::vector<int>{static_cast<int>(rc.get_int("n"))};
        for (int n : ns) require(n >= 2 && n <= 64, "n", "must lie in [2, 64]");
    }
    if (has("gamma")) {
        const double g = rc.get_real("gamma");
        for (int n : ns) require(in_open(g, 0.0, 0.5 * n), "gamma", "must lie in (0, n/2)");
    }
    if (has("m")) {
        const std::vector<int> ms = rc.command == Command::Green ? std::vector<int>{static_cast<int>(rc.get_int("m"))}
                                                                 : rc.get_int_list("m");
        for (int m : ms) require(m >= 0 && m <= 200, "m", "must lie in [0, 200]");
    }
    if (has("xi")) {
        for (double x : rc.get_real_grid("xi")) require(std::abs(x) <= 1e4, "xi", "frequencies must satisfy |xi| <= 1e4");
    }
    if (has("j_max")) require(rc.get_int("j_max") >= 0 && rc.get_int("j_max") <= 50, "j_max", "must lie in [0, 50]");
    if (has("m_max")) require(rc.get_int("m_max") >= 1 && rc.get_int("m_max") <= 50, "m_max", "must lie in [1, 50]");
    if (has("tau_max")) require(rc.get_real("tau_max") > 0.0, "tau_max", "must be positive");
    if (has("tol")) require(in_open(rc.get_real("tol"), 0.0, 1.0), "tol", "must lie in (0, 1)");
    if (rc.command == Command::Indicial || rc.command == Command::CheckLemma) {
        require(in_open(rc.get_real("tol"), 1e-12, 1e-4), "tol", "root tolerance must lie in (1e-12, 1e-4)");
    }
    if (rc.command == Command::CheckLemma) {
        require(rc.get_int("m_max") <= 10, "m_max", "must be <= 10");
        require(rc.get_int("j_max") <= 4, "j_max", "must be <= 4");
    }
    if (rc.command == Command::Green) {
        require(!rc.get_text("input").empty(), "input", "an input CSV is required");
        require(rc.get_real("delta") > 0.0, "delta", "must be positive");
        require(rc.get_real("delta0") >= 0.0, "delta0", "must be >= 0");
    }
    if (has("phi_grid")) require(rc.get_int("phi_grid") >= 64, "phi_grid", "must be >= 64");
    if (rc.command == Command::Glue) {
        require(in_open(rc.get_real("epsilon"), 0.0, 0.25), "epsilon", "must lie in (0, 0.25)");
        for (double e : rc.get_real_list("eps")) require(in_open(e, 0.0, 0.25), "eps", "every value must lie in (0, 0.25)");
        const double lo = -(ns.front() - 1) / 2.0;
        const double mu = rc.get_real("mu");
        require(mu >= lo && mu < 0.0, "mu", "must lie in [-(n-1)/2, 0)");
        if (const auto d = rc.get_opt_real("delta")) require(*d > 0.0 && *d <= 1.0, "delta", "must lie in (0, 1]");
        require(rc.get_real("cutoff_width") > 0.0, "cutoff_width", "must be positive");
        require(rc.get_real("curvature_scale") >= 0.0, "curvature_scale", "must be >= 0");
        require(rc.get_real("ds") > 0.0 && rc.get_real("ds") <= 0.1, "ds", "must lie in (0, 0.1]");
        require(rc.get_real("pad") >= 10.0, "pad", "must be >= 10");
    }
    if (rc.command == Command::Solve) {
        require(rc.get_real("L") >= 0.0, "L", "must be >= 0");
        require(rc.get_int("mmax") >= 0 && rc.get_int("mmax") <= 64, "mmax", "must lie in [0, 64]");
        const long nsamp = rc.get_int("ns");
        require(nsamp >= 16 && nsamp % 2 == 0 && nsamp <= 4096, "ns", "must be even and in [16, 4096]");
        require(in_open(rc.get_real("amp"), 0.0, 0.5), "amp", "must lie in (0, 0.5)");
        require(rc.get_int("mode") >= 0 && rc.get_int("mode") <= rc.get_int("mmax"), "mode", "must lie in [0, mmax]");
        require(rc.get_int("wave") >= 0 && rc.get_int("wave") < nsamp / 2, "wave", "must lie in [0, ns/2)");
        require(rc.get_int("max_iter") >= 1, "max_iter", "must be >= 1");
    }
    if (rc.command == Command::Accept) {
        for (int c : rc.get_int_list("criteria")) require(c >= 1 && c <= 10, "criteria", "criteria are numbered 1..10");
    }
}

} // namespace detail

/// Resolve and validate. Precedence: flags, then the command's section, then the global
/// section, then defaults. Global keys that belong to other commands are ignored so one file
/// can serve several commands; unknown keys are always rejected.
inline RunConfig build(Command command, const std::vector<Entry>& file_entries,
                       const std::map<std::string, std::string>& overrides = {}) {
    RunConfig rc;
    rc.command = command;
    const auto specs = command_keys(command);
    for (const auto& s : specs) rc.values[s.key] = s.fallback;
    const std::string section = to_string(command);
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& e : file_entries) {
            const bool global = e.section.empty();
            if (e.key == "format_version" && global) {
                if (e.value != std::to_string(config_format_version)) {
                    throw ValidationError("format_version", "unsupported version '" + e.value + "'");
                }
                continue;
            }
            if (!all_keys().count(e.key)) throw ValidationError(e.key, "unknown key (line " + std::to_string(e.line) + ")");
            if ((pass == 0) != global) continue;
            const bool applies = rc.values.count(e.key) > 0;
            if (!global && e.section != section) continue;
            if (!applies) {
                if (global) continue;
                throw ValidationError(e.key, "not a parameter of " + section + " (line " + std::to_string(e.line) + ")");
            }
            rc.values[e.key] = e.value;
        }
    }
    for (const auto& [k, v] : overrides) {
        if (!rc.values.count(k)) throw ValidationError(k, "not a parameter of " + section);
        rc.values[k] = v;
    }
    for (const auto& s : specs) detail::check_kind(rc, s);
    detail::check_ranges(rc);
    return rc;
}

} // namespace config

/// Reads `path` (if non-empty) and applies flag overrides.
inline RunConfig load_config(const std::string& path, Command command,
                             const std::map<std::string, std::string>& overrides = {}) {
    const std::vector<config::Entry> entries = path.empty() ? std::vector<config::Entry>{} : config::parse_file(path);
    return config::build(command, entries, overrides);
}

} // namespace neckforge
