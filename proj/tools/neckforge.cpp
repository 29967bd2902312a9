// neckforge command-line front end.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neckforge/acceptance.hpp"
#include "neckforge/config.hpp"
#include "neckforge/extension.hpp"
#include "neckforge/indicial.hpp"
#include "neckforge/modegreen.hpp"
#include "neckforge/neck.hpp"
#include "neckforge/parallel.hpp"
#include "neckforge/solver.hpp"
#include "neckforge/symbol.hpp"

namespace nf = neckforge;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_acceptance = 4;

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

/// Output sink: the configured path or stdout, always starting with the config header.
class Emitter {
public:
    explicit Emitter(const nf::RunConfig& rc) : rc_(rc) {
        const std::string& path = rc.get_text("output");
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw nf::ValidationError("output", "cannot write " + path);
        }
        out() << "# neckforge " << nf::toolkit_version << "\n";
        out() << "# format_version = " << rc.format_version << "\n";
        out() << "# command = " << nf::to_string(rc.command) << "\n";
        for (const auto& [k, v] : rc.values) out() << "# " << k << " = " << v << "\n";
        if (!rc.get_flag("deterministic")) out() << "# generated = " << timestamp() << "\n";
    }

    std::ostream& out() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }
    bool to_file() const { return static_cast<bool>(file_); }

    void comment(const std::string& text) { out() << "# " << text << "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out() << (i ? "," : "") << cells[i];
        out() << "\n";
    }

private:
    static std::string timestamp() {
        const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::ostringstream os;
        os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        return os.str();
    }

    const nf::RunConfig& rc_;
    std::unique_ptr<std::ofstream> file_;
};

unsigned threads_of(const nf::RunConfig& rc) { return nf::parallel::resolve_threads(static_cast<int>(rc.get_int("threads"))); }

int run_symbol(const nf::RunConfig& rc) {
    const double gamma = rc.get_real("gamma");
    struct Item {
        int n, m;
        double xi, theta;
    };
    std::vector<Item> items;
    for (int n : rc.get_int_list("n")) {
        for (int m : rc.get_int_list("m")) {
            for (double xi : rc.get_real_grid("xi")) items.push_back({n, m, xi, 0.0});
        }
    }
    nf::parallel::for_each_index(items.size(), [&](std::size_t i) {
        items[i].theta = nf::symbol::theta(nf::ModeSpec(items[i].n, gamma, items[i].m), items[i].xi);
    }, threads_of(rc));
    Emitter em(rc);
    em.row({"n", "gamma", "m", "xi", "theta"});
    for (const auto& it : items) em.row({std::to_string(it.n), num(gamma), std::to_string(it.m), num(it.xi), num(it.theta)});
    return 0;
}

int run_indicial(const nf::RunConfig& rc) {
    const double gamma = rc.get_real("gamma");
    const int j_max = static_cast<int>(rc.get_int("j_max"));
    struct Item {
        int n, m;
        nf::RootCatalog cat;
    };
    std::vector<Item> items;
    for (int n : rc.get_int_list("n")) {
        for (int m : rc.get_int_list("m")) items.push_back({n, m, {}});
    }
    nf::parallel::for_each_index(items.size(), [&](std::size_t i) {
        const nf::ModeSpec spec(items[i].n, gamma, items[i].m);
        items[i].cat = nf::indicial::find_roots_robust(spec, nf::indicial::default_box(spec, j_max, rc.get_real("tau_max")),
                                                       rc.get_real("tol"));
    }, threads_of(rc));
    Emitter em(rc);
    em.row({"n", "gamma", "m", "j", "sigma", "tau"});
    for (const auto& it : items) {
        for (const auto& r : it.cat.roots) {
            if (r.j > j_max) continue;
            em.row({std::to_string(it.n), num(gamma), std::to_string(it.m), std::to_string(r.j), num(r.sigma), num(r.tau)});
        }
    }
    return 0;
}

int run_check_lemma(const nf::RunConfig& rc) {
    const std::vector<int> dims = rc.get_int_list("n");
    std::vector<nf::indicial::LemmaReport> reports(dims.size());
    nf::parallel::for_each_index(dims.size(), [&](std::size_t i) {
        reports[i] = nf::indicial::check_lemma(dims[i], static_cast<int>(rc.get_int("m_max")),
                                               static_cast<int>(rc.get_int("j_max")), rc.get_real("tol"));
    }, threads_of(rc));
    Emitter em(rc);
    bool ok = true;
    for (const auto& rep : reports) {
        em.out() << rep.to_text();
        ok = ok && rep.all_pass();
    }
    em.out() << "lemma suite: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : exit_acceptance;
}

nf::LineFunction read_samples(const std::string& path, int mode) {
    std::ifstream in(path);
    if (!in) throw nf::ValidationError("input", "cannot open " + path);
    std::vector<double> s, v;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = nf::config::detail::trim(line);
        if (line.empty()) continue;
        const auto cells = nf::config::detail::split(line, ',');
        if (!header) {
            header = true;
            if (cells.size() != 2 || cells[0] != "s" || cells[1] != "value") {
                throw nf::ParseError("expected the header row 's,value' in " + path, lineno);
            }
            continue;
        }
        if (cells.size() != 2) throw nf::ParseError("expected two columns in " + path, lineno);
        const auto a = nf::config::detail::to_real(cells[0]);
        const auto b = nf::config::detail::to_real(cells[1]);
        if (!a || !b) throw nf::ParseError("non-numeric sample in " + path, lineno);
        s.push_back(*a);
        v.push_back(*b);
    }
    if (s.size() < nf::LineFunction::min_samples) throw nf::ValidationError("input", "need at least 16 samples");
    const double ds = (s.back() - s.front()) / static_cast<double>(s.size() - 1);
    if (!(ds > 0.0)) throw nf::ValidationError("input", "s must increase");
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (std::abs(s[k] - (s.front() + ds * static_cast<double>(k))) > 1e-6 * ds) {
            throw nf::ValidationError("input", "s must be uniformly spaced");
        }
    }
    return nf::LineFunction(s.front(), ds, std::move(v), mode);
}

int run_green(const nf::RunConfig& rc) {
    const nf::ModeSpec spec(static_cast<int>(rc.get_int("n")), 0.5, static_cast<int>(rc.get_int("m")));
    const nf::LineFunction h = read_samples(rc.get_text("input"), spec.m);
    const nf::DecayProfile profile{rc.get_real("delta"), rc.get_real("delta0")};
    const nf::modegreen::GreenResult res = nf::modegreen::green_solve_detailed(spec, h, profile);
    Emitter em(rc);
    em.comment("contour shift beta = " + num(res.beta));
    for (const auto& w : res.diagnostics.warnings) {
        em.comment("warning: " + w);
        std::cerr << "warning: " << w << "\n";
    }
    em.row({"s", "value"});
    for (std::size_t k = 0; k < res.v.size(); ++k) em.row({num(res.v.s(k)), num(res.v.values[k])});
    return 0;
}

int run_extension(const nf::RunConfig& rc) {
    const auto scheme = rc.get_text("scheme") == "fd2d" ? nf::ExtensionScheme::FiniteDifference2D
                                                         : nf::ExtensionScheme::CollocationODE;
    const int grid = static_cast<int>(rc.get_int("phi_grid"));
    std::vector<nf::extension::ValidationRow> rows;
    for (int n : rc.get_int_list("n")) {
        for (int m : rc.get_int_list("m")) {
            for (double xi : rc.get_real_grid("xi")) rows.push_back({n, m, xi});
        }
    }
    nf::parallel::for_each_index(rows.size(), [&](std::size_t i) {
        rows[i] = nf::extension::validate_against_symbol(rows[i].n, rows[i].m, rows[i].xi, grid, scheme);
    }, threads_of(rc));
    Emitter em(rc);
    em.row({"n", "m", "xi", "dtn", "theta", "rel_err"});
    for (const auto& r : rows) {
        em.row({std::to_string(r.n), std::to_string(r.m), num(r.xi), num(r.dtn), num(r.theta), num(r.rel_err)});
    }
    return 0;
}

nf::NeckConfig neck_config(const nf::RunConfig& rc) {
    nf::NeckConfig cfg;
    cfg.n = static_cast<int>(rc.get_int("n"));
    cfg.epsilon = rc.get_real("epsilon");
    cfg.delta = rc.get_opt_real("delta");
    cfg.cutoff_width = rc.get_real("cutoff_width");
    cfg.curvature_scale = rc.get_real("curvature_scale");
    cfg.ds = rc.get_real("ds");
    cfg.pad = rc.get_real("pad");
    cfg.weight_convention = rc.get_text("weight") == "literal" ? nf::WeightConvention::Literal
                                                               : nf::WeightConvention::Centered;
    return cfg;
}

int run_glue(const nf::RunConfig& rc) {
    nf::NeckConfig cfg = neck_config(rc);
    const nf::WeightedNormSpec norm{rc.get_real("mu"), 0};
    if (rc.get_flag("sweep")) {
        const std::vector<double> eps = rc.get_real_list("eps");
        std::vector<nf::NeckConfig> cfgs(eps.size(), cfg);
        for (std::size_t i = 0; i < eps.size(); ++i) {
            cfgs[i].epsilon = eps[i];
            cfgs[i].validate();
        }
        std::vector<nf::neck::SweepRow> rows(eps.size());
        nf::parallel::for_each_index(eps.size(), [&](std::size_t i) {
            rows[i] = nf::neck::sweep(cfgs[i], {eps[i]}, norm).front();
        }, threads_of(rc));
        Emitter em(rc);
        em.row({"epsilon", "delta", "S", "E", "E_q_minus_c"});
        for (const auto& r : rows) em.row({num(r.epsilon), num(r.delta), num(r.S), num(r.E), num(r.E_literal)});
        return 0;
    }
    cfg.validate();
    const nf::neck::CurvatureError err = nf::neck::approximate_curvature_error(cfg, norm);
    Emitter em(rc);
    em.row({"s", "factor", "Q_error", "weight"});
    for (std::size_t k = 0; k < err.u.size(); ++k) {
        const double s = err.u.s(k);
        if (std::abs(s) > err.window) continue;
        em.row({num(s), num(err.u.values[k]), num(err.gluing_error.values[k]), num(err.weight.values[k])});
    }
    std::ostringstream summary;
    summary << "summary: epsilon = " << num(cfg.epsilon) << ", E = " << num(err.E) << ", E_q_minus_c = " << num(err.E_literal);
    em.comment(summary.str());
    if (em.to_file()) std::cout << summary.str() << "\n";
    return 0;
}

template <class B>
int report_solve(const nf::RunConfig& rc, const B& bg, const nf::ModeTable& f0) {
    nf::solver::NewtonOptions opt;
    opt.method = rc.get_text("method") == "newton" ? nf::solver::Method::Newton : nf::solver::Method::FixedPoint;
    opt.tol = rc.get_real("tol");
    opt.max_iter = static_cast<int>(rc.get_int("max_iter"));
    const nf::solver::NewtonReport rep = nf::solver::newton_solve(bg, f0, opt);
    const nf::ModeTable dist = rep.final_f - bg.constant(1.0);

    std::ostringstream text;
    text << "method: " << nf::solver::to_string(rep.method) << "\n"
         << "converged: " << (rep.converged ? "yes" : "no") << "\n"
         << "iterations: " << rep.iterations << "\n"
         << "final_residual: " << num(rep.residual_history.back()) << "\n"
         << "distance_to_constant: " << num(nf::solver::grid_norm(bg, dist)) << "\n"
         << "message: " << rep.message << "\n";
    Emitter em(rc);
    if (em.to_file()) {
        std::cout << text.str();
    } else {
        std::istringstream lines(text.str());
        for (std::string l; std::getline(lines, l);) em.comment(l);
    }
    em.row({"iteration", "residual", "ratio", "quadratic_ratio", "linear_iterations"});
    const auto rates = rep.linear_rates();
    const auto quad = rep.quadratic_constants();
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
        const bool has = k > 0;
        const bool lin = has && k - 1 < rep.linear_iterations.size();
        em.row({std::to_string(k), num(rep.residual_history[k]), has ? num(rates[k - 1]) : "",
                has ? num(quad[k - 1]) : "", lin ? std::to_string(rep.linear_iterations[k - 1]) : ""});
    }
    if (!rep.converged) throw nf::NonConvergence(rep.message);
    return 0;
}

int run_solve(const nf::RunConfig& rc) {
    const int n = static_cast<int>(rc.get_int("n"));
    const int mode = static_cast<int>(rc.get_int("mode"));
    const double amp = rc.get_real("amp");
    if (rc.get_text("background") == "ball") {
        const nf::BallBackground bg(n, static_cast<int>(rc.get_int("mmax")));
        return report_solve(rc, bg, nf::ModeTable(bg.constant(1.0) + bg.mode(mode, 0, amp)));
    }
    const double L = rc.get_real("L") > 0.0 ? rc.get_real("L") : nf::CylinderBackground::default_period(n);
    const nf::CylinderBackground bg(n, L, static_cast<int>(rc.get_int("mmax")), static_cast<int>(rc.get_int("ns")));
    return report_solve(rc, bg, nf::ModeTable(bg.constant(1.0) + bg.mode(mode, static_cast<int>(rc.get_int("wave")), amp)));
}

int run_accept(const nf::RunConfig& rc) {
    nf::acceptance::Options opt;
    opt.threads = threads_of(rc);
    opt.seed = static_cast<unsigned long>(rc.get_int("seed"));
    const bool to_file = !rc.get_text("output").empty();
    std::unique_ptr<Emitter> em;
    if (to_file) em = std::make_unique<Emitter>(rc);
    bool all = true;
    for (int id : rc.get_int_list("criteria")) {
        const auto r = nf::acceptance::run_one(id, opt);
        std::cout << r.line() << "\n" << std::flush;
        if (em) {
            em->out() << r.line() << "\n";
            for (const auto& d : r.details) em->out() << "    " << d << "\n";
        }
        all = all && r.pass;
    }
    std::cout << "acceptance: " << (all ? "PASS" : "FAIL") << "\n";
    return all ? 0 : exit_acceptance;
}

int dispatch(const nf::RunConfig& rc) {
    switch (rc.command) {
    case nf::Command::Symbol: return run_symbol(rc);
    case nf::Command::Indicial: return run_indicial(rc);
    case nf::Command::CheckLemma: return run_check_lemma(rc);
    case nf::Command::Green: return run_green(rc);
    case nf::Command::ExtensionValidate: return run_extension(rc);
    case nf::Command::Glue: return run_glue(rc);
    case nf::Command::Solve: return run_solve(rc);
    case nf::Command::Accept: return run_accept(rc);
    }
    return exit_config;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    for (char& ch : f) {
        if (ch == '_') ch = '-';
    }
    return "--" + f;
}

struct Sub {
    nf::Command command;
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> text;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neckforge: numerical toolkit for boundary connected sums"};
    app.set_version_flag("--version", std::string("neckforge ") + nf::toolkit_version);
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Sub>> subs;
    for (const auto& [cmd, name] : nf::command_names()) {
        auto sub = std::make_unique<Sub>();
        sub->command = cmd;
        sub->app = app.add_subcommand(name, "run " + name);
        sub->app->add_option("--config", sub->config_path, "key = value configuration file");
        for (const auto& spec : nf::config::command_keys(cmd)) {
            const std::string help = spec.help + " [default: " + (spec.fallback.empty() ? "none" : spec.fallback) + "]";
            if (spec.kind == nf::config::Kind::Flag) {
                sub->options[spec.key] = sub->app->add_flag(flag_name(spec.key), sub->flags[spec.key], help);
            } else {
                sub->options[spec.key] = sub->app->add_option(flag_name(spec.key), sub->text[spec.key], help);
            }
        }
        subs.push_back(std::move(sub));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }
    for (const auto& sub : subs) {
        if (!sub->app->parsed()) continue;
        try {
            std::map<std::string, std::string> overrides;
            for (const auto& [key, opt] : sub->options) {
                if (opt->count() == 0) continue;
                overrides[key] = sub->flags.count(key) ? (sub->flags[key] ? "true" : "false") : sub->text[key];
            }
            const nf::RunConfig rc = nf::load_config(sub->config_path, sub->command, overrides);
            return dispatch(rc);
        } catch (const nf::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return exit_config;
        } catch (const nf::NumericalError& e) {
            std::cerr << "numerical error: " << e.what() << "\n";
            return exit_numerical;
        } catch (const std::invalid_argument& e) {
            std::cerr << "numerical error: " << e.what() << "\n";
            return exit_numerical;
        }
    }
    return exit_config;
}
