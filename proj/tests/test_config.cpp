#include <gtest/gtest.h>

#include <cstdlib>

#include "neckforge/config.hpp"
#include "neckforge/parallel.hpp"

using namespace neckforge;

namespace {

RunConfig from_text(Command c, const std::string& text, const std::map<std::string, std::string>& flags = {}) {
    return config::build(c, config::parse_text(text), flags);
}

} // namespace

TEST(Config, EmptyFileGivesDefaults) {
    const RunConfig rc = from_text(Command::Glue, "");
    EXPECT_DOUBLE_EQ(rc.get_real("epsilon"), 0.01);
    EXPECT_FALSE(rc.get_flag("sweep"));
    EXPECT_FALSE(rc.get_opt_real("delta").has_value());
}

TEST(Config, FlagsOnly) {
    const RunConfig rc = from_text(Command::Glue, "", {{"epsilon", "0.05"}});
    EXPECT_DOUBLE_EQ(rc.get_real("epsilon"), 0.05);
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        from_text(Command::Symbol, "foo = 1\n");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "foo");
    }
}

TEST(Config, EpsilonOutOfRange) {
    EXPECT_THROW(from_text(Command::Glue, "epsilon = 0.5\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Glue, "", {{"epsilon", "0"}}), ValidationError);
    EXPECT_THROW(from_text(Command::Glue, "", {{"epsilon", "0.25"}}), ValidationError);
    EXPECT_NO_THROW(from_text(Command::Glue, "", {{"epsilon", "0.2499"}}));
}

TEST(Config, ParseErrorCarriesLine) {
    try {
        config::parse_text("# comment\nn = 3\n\nthis line is wrong\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
    }
    EXPECT_THROW(config::parse_text("[nonsense]\n"), ParseError);
    EXPECT_THROW(config::parse_text("n = 3\nn = 4\n"), ParseError);
}

TEST(Config, Precedence) {
    const std::string text = "epsilon = 0.1\n[glue]\nepsilon = 0.05\n[symbol]\ngamma = 0.5\n";
    EXPECT_DOUBLE_EQ(from_text(Command::Glue, text).get_real("epsilon"), 0.05);
    EXPECT_DOUBLE_EQ(from_text(Command::Glue, text, {{"epsilon", "0.02"}}).get_real("epsilon"), 0.02);
    EXPECT_DOUBLE_EQ(from_text(Command::Glue, "epsilon = 0.1\n").get_real("epsilon"), 0.1);
}

TEST(Config, ForeignKeyInGlobalSectionIgnored) {
    EXPECT_NO_THROW(from_text(Command::Symbol, "epsilon = 0.1\n"));
    EXPECT_THROW(from_text(Command::Symbol, "[symbol]\nepsilon = 0.1\n"), ValidationError);
}

TEST(Config, GridAndRangeSyntax) {
    const RunConfig rc = from_text(Command::Symbol, "");
    const std::vector<double> xi = rc.get_real_grid("xi");
    ASSERT_EQ(xi.size(), 9u);
    EXPECT_DOUBLE_EQ(xi.front(), 0.0);
    EXPECT_DOUBLE_EQ(xi.back(), 4.0);
    EXPECT_EQ(rc.get_int_list("m"), (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(rc.get_int_list("n").size() * rc.get_int_list("m").size() * xi.size(), 45u);
    const RunConfig rc2 = from_text(Command::Symbol, "m = 1,3\nxi = 0.5, 2\n");
    EXPECT_EQ(rc2.get_int_list("m"), (std::vector<int>{1, 3}));
    EXPECT_EQ(rc2.get_real_grid("xi"), (std::vector<double>{0.5, 2.0}));
}

TEST(Config, KindAndRangeChecks) {
    EXPECT_THROW(from_text(Command::Symbol, "n = three\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Symbol, "n = 1\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Solve, "method = bisection\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Solve, "ns = 17\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Accept, "criteria = 11\n"), ValidationError);
    EXPECT_THROW(from_text(Command::Glue, "format_version = 2\n"), ValidationError);
    EXPECT_NO_THROW(from_text(Command::Glue, "format_version = 1\n"));
}

TEST(Config, CommandNamesRoundTrip) {
    for (const auto& [c, name] : command_names()) {
        EXPECT_EQ(to_string(c), name);
        EXPECT_EQ(parse_command(name), c);
    }
    EXPECT_FALSE(parse_command("nope").has_value());
}

TEST(Threads, EnvironmentVariable) {
    ::setenv("NECKFORGE_THREADS", "3", 1);
    EXPECT_EQ(parallel::resolve_threads(), 3u);
    EXPECT_EQ(parallel::resolve_threads(2), 2u);
    ::setenv("NECKFORGE_THREADS", "zero", 1);
    EXPECT_THROW(parallel::resolve_threads(), ValidationError);
    ::unsetenv("NECKFORGE_THREADS");
    EXPECT_GE(parallel::resolve_threads(), 1u);
}

TEST(Threads, ResultsIndependentOfWorkerCount) {
    std::vector<double> a(100), b(100);
    parallel::for_each_index(a.size(), [&](std::size_t i) { a[i] = std::sqrt(double(i)); }, 1);
    parallel::for_each_index(b.size(), [&](std::size_t i) { b[i] = std::sqrt(double(i)); }, 4);
    EXPECT_EQ(a, b);
    EXPECT_THROW(parallel::for_each_index(10, [](std::size_t i) { if (i == 7) throw Diverged("x"); }, 3), Diverged);
}
