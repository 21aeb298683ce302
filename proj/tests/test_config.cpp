#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "epdiff/config.hpp"
#include "epdiff/errors.hpp"

using namespace epdiff;
using std::numbers::pi;

TEST_CASE("defaults parse from an empty document and validate") {
    const RunConfig config = parse_config_text("");
    CHECK(config == RunConfig{});
    CHECK(config.n_modes == 256);
    CHECK(config.scheme == RunScheme::average);
    CHECK(config.dealias);
    CHECK(config.output.formats == std::vector<std::string>{"csv", "json", "plot"});
}

TEST_CASE("a full document round-trips exactly through emit") {
    RunConfig config;
    config.n_modes = 64;
    config.alpha = 0.7301;
    config.scheme = RunScheme::explicit_euler;
    config.dt = 0.0125;
    config.t_final = 2.5;
    config.dealias = false;
    config.scenario.kind = ScenarioKind::peakon_pair;
    config.scenario.amplitude = 1.25;
    config.scenario.center = -pi / 2.0;
    config.scenario.amplitude2 = -0.75;
    config.scenario.center2 = 1.0 / 3.0;
    config.solver.tolerance = 3e-13;
    config.solver.max_iterations = 21;
    config.solver.method = SolverOptions::Method::picard;
    config.output.directory = "out/somewhere";
    config.output.stride = 7;
    config.output.formats = {"csv", "json"};
    config.compare.dts = {0.025, 0.0125};
    config.compare.reference_dt = 2e-4;
    config.compare.schemes = {"average"};

    const RunConfig reparsed = parse_config_text(emit_config(config));
    CHECK(reparsed == config);
}

TEST_CASE("every preset parses its own emission and validates") {
    for (const auto& name : preset_names()) {
        const RunConfig preset = preset_config(name);
        CHECK(parse_config_text(emit_config(preset)) == preset);
    }
    CHECK_THROWS_AS(preset_config("nonexistent"), std::invalid_argument);
}

TEST_CASE("the gaussian-hires preset pins the high-resolution parameters") {
    const RunConfig config = preset_config("gaussian-hires");
    CHECK(config.n_modes == 1000);
    CHECK(config.alpha == 1.0);
    CHECK(config.dt == 0.01);
    CHECK(config.scenario.kind == ScenarioKind::gaussian);
    CHECK(config.scenario.amplitude == 1.0);
    CHECK(config.scenario.sigma == 1.0);
}

TEST_CASE("desk presets target 513 points and the peakon pair is head-on") {
    CHECK(preset_config("gaussian-average").n_modes == 256);
    CHECK(preset_config("gaussian-explicit").scheme == RunScheme::explicit_euler);
    CHECK(preset_config("gaussian-implicit").scheme == RunScheme::implicit_euler);
    const RunConfig pair = preset_config("peakon-pair");
    CHECK(pair.scenario.kind == ScenarioKind::peakon_pair);
    CHECK(pair.dt == 0.005);
    CHECK(pair.t_final == 3.0);
    CHECK(pair.scenario.amplitude == 1.0);
    CHECK(pair.scenario.amplitude2 == -1.0);
    CHECK(pair.scenario.center == doctest::Approx(-pi / 2.0));
    CHECK(pair.scenario.center2 == doctest::Approx(pi / 2.0));
}

TEST_CASE("unknown sections and keys are rejected with their line") {
    try {
        parse_config_text("[grid]\nn_modes = 8\n\n[grud]\nn_modes = 8\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.line == 5);  // reported at the section's first key
        CHECK(std::string(e.what()).find("grud") != std::string::npos);
    }
    try {
        parse_config_text("[grid]\nn_nodes = 8\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("grid.n_nodes") != std::string::npos);
    }
}

TEST_CASE("malformed lines carry line numbers") {
    try {
        parse_config_text("[grid]\nn_modes 8\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_config_text("n_modes = 8\n"), config_error);   // key before section
    CHECK_THROWS_AS(parse_config_text("[grid\nn_modes = 8\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[grid]\n= 8\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn_modes = 8\nn_modes = 9\n"), config_error);
}

TEST_CASE("type errors carry line and column of the value") {
    try {
        parse_config_text("[grid]\nn_modes = eight\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 11);
        CHECK(std::string(e.what()).find("integer") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[run]\ndt = fast\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[run]\ndealias = yes\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[solver]\nmethod = quasi\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[output]\nformats = csv,xml\n"), config_error);
}

TEST_CASE("validation errors name the offending field") {
    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            parse_config_text(text);
            FAIL("expected config_error for ", field);
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    expect_field("[run]\ndt = 0\n", "run.dt");
    expect_field("[run]\ndt = -0.01\n", "run.dt");
    expect_field("[run]\nt_final = 0\n", "run.t_final");
    expect_field("[run]\ndt = 2.0\nt_final = 1.0\n", "run.dt");
    expect_field("[run]\ndt = 0.3\nt_final = 1.0\n", "run.dt");  // not a whole step count
    expect_field("[grid]\nn_modes = 0\n", "grid.n_modes");
    expect_field("[grid]\nalpha = 0\n", "grid.alpha");
    expect_field("[scenario]\nsigma = 0\n", "scenario.sigma");
    expect_field("[solver]\ntolerance = 0\n", "solver.tolerance");
    expect_field("[solver]\nmax_iterations = 0\n", "solver.max_iterations");
    expect_field("[output]\nstride = 0\n", "output.stride");
    expect_field("[compare]\ndts = 0.3\n", "compare.dts");
    expect_field("[compare]\nreference_dt = 0.3\n", "compare.reference_dt");
}

TEST_CASE("midpoint scheme is recognized but rejected with an explanation") {
    try {
        parse_config_text("[run]\nscheme = midpoint\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        const std::string what = e.what();
        CHECK(what.find("midpoint") != std::string::npos);
        CHECK(what.find("unsupported") != std::string::npos);
        CHECK(what.find("average") != std::string::npos);  // points at the alternatives
    }
    CHECK_THROWS_AS(parse_config_text("[run]\nscheme = leapfrog\n"), config_error);
}

TEST_CASE("scheme and kind names accepted by the parser") {
    CHECK(parse_config_text("[run]\nscheme = explicit\n").scheme == RunScheme::explicit_euler);
    CHECK(parse_config_text("[run]\nscheme = implicit\n").scheme == RunScheme::implicit_euler);
    CHECK(parse_config_text("[run]\nscheme = reference\n").scheme == RunScheme::reference);
    CHECK(parse_config_text("[scenario]\nkind = peakon\n").scenario.kind == ScenarioKind::peakon);
    CHECK(run_scheme_from_name(run_scheme_name(RunScheme::average)) == RunScheme::average);
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
    const RunConfig config = parse_config_text(
        "# leading comment\n"
        "\n"
        "[grid]\n"
        "  n_modes   =   32  \n"
        "; another comment style\n"
        "alpha = 2.0\n");
    CHECK(config.n_modes == 32);
    CHECK(config.alpha == 2.0);
}

TEST_CASE("run_n_steps reflects dt and t_final") {
    RunConfig config;
    config.dt = 0.01;
    config.t_final = 5.0;
    CHECK(run_n_steps(config) == 500);
    config.dt = 0.005;
    config.t_final = 3.0;
    CHECK(run_n_steps(config) == 600);
}

TEST_CASE("parse_config_file reports missing files as io_error") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path/epdiff.ini"), io_error);
}

TEST_CASE("compare section rejects reference among variational schemes") {
    CHECK_THROWS_AS(parse_config_text("[compare]\nschemes = average,reference\n"), config_error);
    const RunConfig config = parse_config_text("[compare]\nschemes = explicit , average\n");
    CHECK(config.compare.schemes == std::vector<std::string>{"explicit", "average"});
}
