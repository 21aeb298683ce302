#include "epdiff/config.hpp"

#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace {

struct Entry {
    std::string value;
    int line;
    int column;  ///< 1-based column of the value
};

/** Section -> key -> value with source position, as read off the text. */
using Document = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

Document read_document(const std::string& text) {
    Document doc;
    std::istringstream stream(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw config_error("malformed section header (expected [name])", line_no, 1);
            }
            section = trim(line.substr(1, line.size() - 2));
            if (doc.count(section)) {
                throw config_error("duplicate section [" + section + "]", line_no, 1);
            }
            doc[section];
            continue;
        }
        const size_t eq = raw.find('=');
        if (eq == std::string::npos) {
            throw config_error("expected key = value", line_no, 1);
        }
        if (section.empty()) {
            throw config_error("key outside any [section]", line_no, 1);
        }
        const std::string key = trim(raw.substr(0, eq));
        if (key.empty()) throw config_error("empty key before '='", line_no, 1);
        size_t value_start = eq + 1;
        while (value_start < raw.size() &&
               std::isspace(static_cast<unsigned char>(raw[value_start]))) {
            ++value_start;
        }
        const std::string value = trim(raw.substr(eq + 1));
        if (doc[section].count(key)) {
            throw config_error("duplicate key " + section + "." + key, line_no, 1);
        }
        doc[section][key] = Entry{value, line_no, static_cast<int>(value_start + 1)};
    }
    return doc;
}

[[noreturn]] void bad_value(const std::string& field, const Entry& entry,
                            const std::string& expected) {
    throw config_error("field " + field + ": expected " + expected + ", got \"" + entry.value +
                           "\"",
                       entry.line, entry.column);
}

double parse_real(const std::string& field, const Entry& entry) {
    const char* begin = entry.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') bad_value(field, entry, "a real number");
    return v;
}

int parse_int(const std::string& field, const Entry& entry) {
    const char* begin = entry.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') bad_value(field, entry, "an integer");
    if (v < INT_MIN || v > INT_MAX) bad_value(field, entry, "an integer in range");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& field, const Entry& entry) {
    if (entry.value == "true") return true;
    if (entry.value == "false") return false;
    bad_value(field, entry, "true or false");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream stream(value);
    while (std::getline(stream, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) items.push_back(t);
    }
    return items;
}

/** Applies one section's entries through a key -> setter table, rejecting
 * unknown keys with their source line. */
template <typename Table>
void apply_section(const Document& doc, const std::string& section, const Table& table) {
    auto it = doc.find(section);
    if (it == doc.end()) return;
    for (const auto& [key, entry] : it->second) {
        auto setter = table.find(key);
        if (setter == table.end()) {
            throw config_error("unknown key " + section + "." + key, entry.line, 1);
        }
        setter->second(section + "." + key, entry);
    }
}

std::string format_real(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out;
}

std::string join_reals(const std::vector<double>& items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += format_real(items[i]);
    }
    return out;
}

[[noreturn]] void invalid_field(const std::string& field, const std::string& why) {
    throw config_error("field " + field + ": " + why);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    const Document doc = read_document(text);
    static const std::set<std::string> known = {"grid",   "run",    "scenario",
                                                "solver", "output", "compare"};
    for (const auto& [section, entries] : doc) {
        if (!known.count(section)) {
            const int line = entries.empty() ? 0 : entries.begin()->second.line;
            throw config_error("unknown section [" + section + "]", line, 1);
        }
    }

    RunConfig config;
    using Setter = std::function<void(const std::string&, const Entry&)>;
    using Table = std::map<std::string, Setter>;

    const Table grid_table = {
        {"n_modes", [&](const std::string& f, const Entry& e) { config.n_modes = parse_int(f, e); }},
        {"alpha", [&](const std::string& f, const Entry& e) { config.alpha = parse_real(f, e); }},
    };
    const Table run_table = {
        {"scheme",
         [&](const std::string& f, const Entry& e) {
             try {
                 config.scheme = run_scheme_from_name(e.value);
             } catch (const std::invalid_argument& err) {
                 throw config_error("field " + f + ": " + err.what(), e.line, e.column);
             }
         }},
        {"dt", [&](const std::string& f, const Entry& e) { config.dt = parse_real(f, e); }},
        {"t_final",
         [&](const std::string& f, const Entry& e) { config.t_final = parse_real(f, e); }},
        {"dealias",
         [&](const std::string& f, const Entry& e) { config.dealias = parse_bool(f, e); }},
    };
    const Table scenario_table = {
        {"kind",
         [&](const std::string& f, const Entry& e) {
             try {
                 config.scenario.kind = scenario_kind_from_name(e.value);
             } catch (const std::invalid_argument& err) {
                 throw config_error("field " + f + ": " + err.what(), e.line, e.column);
             }
         }},
        {"amplitude",
         [&](const std::string& f, const Entry& e) { config.scenario.amplitude = parse_real(f, e); }},
        {"center",
         [&](const std::string& f, const Entry& e) { config.scenario.center = parse_real(f, e); }},
        {"sigma",
         [&](const std::string& f, const Entry& e) { config.scenario.sigma = parse_real(f, e); }},
        {"amplitude2",
         [&](const std::string& f, const Entry& e) {
             config.scenario.amplitude2 = parse_real(f, e);
         }},
        {"center2",
         [&](const std::string& f, const Entry& e) { config.scenario.center2 = parse_real(f, e); }},
    };
    const Table solver_table = {
        {"tolerance",
         [&](const std::string& f, const Entry& e) { config.solver.tolerance = parse_real(f, e); }},
        {"max_iterations",
         [&](const std::string& f, const Entry& e) {
             config.solver.max_iterations = parse_int(f, e);
         }},
        {"method",
         [&](const std::string& f, const Entry& e) {
             if (e.value == "newton") {
                 config.solver.method = SolverOptions::Method::newton;
             } else if (e.value == "picard") {
                 config.solver.method = SolverOptions::Method::picard;
             } else {
                 bad_value(f, e, "newton or picard");
             }
         }},
    };
    const Table output_table = {
        {"directory",
         [&](const std::string& f, const Entry& e) {
             if (e.value.empty()) bad_value(f, e, "a non-empty path");
             config.output.directory = e.value;
         }},
        {"stride",
         [&](const std::string& f, const Entry& e) { config.output.stride = parse_int(f, e); }},
        {"formats",
         [&](const std::string& f, const Entry& e) {
             config.output.formats = split_list(e.value);
             for (const auto& fmt : config.output.formats) {
                 if (fmt != "csv" && fmt != "json" && fmt != "plot") {
                     bad_value(f, e, "a comma list drawn from csv, json, plot");
                 }
             }
         }},
    };
    const Table compare_table = {
        {"dts",
         [&](const std::string& f, const Entry& e) {
             config.compare.dts.clear();
             for (const auto& item : split_list(e.value)) {
                 config.compare.dts.push_back(parse_real(f, Entry{item, e.line, e.column}));
             }
         }},
        {"reference_dt",
         [&](const std::string& f, const Entry& e) {
             config.compare.reference_dt = parse_real(f, e);
         }},
        {"schemes",
         [&](const std::string& f, const Entry& e) {
             config.compare.schemes = split_list(e.value);
             for (const auto& name : config.compare.schemes) {
                 const RunScheme s = [&] {
                     try {
                         return run_scheme_from_name(name);
                     } catch (const std::invalid_argument& err) {
                         throw config_error("field " + f + ": " + err.what(), e.line, e.column);
                     }
                 }();
                 if (s == RunScheme::reference) {
                     bad_value(f, e, "variational scheme names (the reference always runs)");
                 }
             }
         }},
    };

    apply_section(doc, "grid", grid_table);
    apply_section(doc, "run", run_table);
    apply_section(doc, "scenario", scenario_table);
    apply_section(doc, "solver", solver_table);
    apply_section(doc, "output", output_table);
    apply_section(doc, "compare", compare_table);

    validate_config(config);
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream stream(path);
    if (!stream) throw io_error("cannot open config file: " + path);
    std::ostringstream text;
    text << stream.rdbuf();
    if (stream.bad()) throw io_error("failed reading config file: " + path);
    return parse_config_text(text.str());
}

std::string emit_config(const RunConfig& config) {
    std::ostringstream out;
    out << "[grid]\n";
    out << "n_modes = " << config.n_modes << "\n";
    out << "alpha = " << format_real(config.alpha) << "\n";
    out << "\n[run]\n";
    out << "scheme = " << run_scheme_name(config.scheme) << "\n";
    out << "dt = " << format_real(config.dt) << "\n";
    out << "t_final = " << format_real(config.t_final) << "\n";
    out << "dealias = " << (config.dealias ? "true" : "false") << "\n";
    out << "\n[scenario]\n";
    out << "kind = " << scenario_kind_name(config.scenario.kind) << "\n";
    out << "amplitude = " << format_real(config.scenario.amplitude) << "\n";
    out << "center = " << format_real(config.scenario.center) << "\n";
    out << "sigma = " << format_real(config.scenario.sigma) << "\n";
    out << "amplitude2 = " << format_real(config.scenario.amplitude2) << "\n";
    out << "center2 = " << format_real(config.scenario.center2) << "\n";
    out << "\n[solver]\n";
    out << "tolerance = " << format_real(config.solver.tolerance) << "\n";
    out << "max_iterations = " << config.solver.max_iterations << "\n";
    out << "method = "
        << (config.solver.method == SolverOptions::Method::newton ? "newton" : "picard") << "\n";
    out << "\n[output]\n";
    out << "directory = " << config.output.directory << "\n";
    out << "stride = " << config.output.stride << "\n";
    out << "formats = " << join(config.output.formats) << "\n";
    out << "\n[compare]\n";
    out << "dts = " << join_reals(config.compare.dts) << "\n";
    out << "reference_dt = " << format_real(config.compare.reference_dt) << "\n";
    out << "schemes = " << join(config.compare.schemes) << "\n";
    return out.str();
}

void validate_config(const RunConfig& config) {
    if (config.n_modes < 1) invalid_field("grid.n_modes", "must be >= 1");
    if (!(config.alpha > 0.0)) invalid_field("grid.alpha", "must be > 0");
    if (!(config.dt > 0.0)) invalid_field("run.dt", "must be > 0");
    if (!(config.t_final > 0.0)) invalid_field("run.t_final", "must be > 0");
    if (config.dt > config.t_final) invalid_field("run.dt", "must be <= t_final");
    const double steps = config.t_final / config.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
        invalid_field("run.dt", "must divide t_final into a whole number of steps");
    }
    if (std::round(steps) > 1e9) invalid_field("run.dt", "implies more than 1e9 steps");
    if (config.scenario.kind == ScenarioKind::gaussian && !(config.scenario.sigma > 0.0)) {
        invalid_field("scenario.sigma", "must be > 0");
    }
    if (!(config.solver.tolerance > 0.0)) invalid_field("solver.tolerance", "must be > 0");
    if (config.solver.max_iterations < 1) invalid_field("solver.max_iterations", "must be >= 1");
    if (config.output.stride < 1) invalid_field("output.stride", "must be >= 1");
    if (config.output.directory.empty()) invalid_field("output.directory", "must be non-empty");
    if (config.compare.dts.empty()) invalid_field("compare.dts", "must list at least one step");
    for (double dt : config.compare.dts) {
        if (!(dt > 0.0)) invalid_field("compare.dts", "steps must be > 0");
        const double n = config.t_final / dt;
        if (std::abs(n - std::round(n)) > 1e-9 * n) {
            invalid_field("compare.dts",
                          "every step must divide t_final into a whole number of steps");
        }
    }
    if (!(config.compare.reference_dt > 0.0)) {
        invalid_field("compare.reference_dt", "must be > 0");
    }
    {
        const double n = config.t_final / config.compare.reference_dt;
        if (std::abs(n - std::round(n)) > 1e-9 * n) {
            invalid_field("compare.reference_dt",
                          "must divide t_final into a whole number of steps");
        }
    }
    if (config.compare.schemes.empty()) {
        invalid_field("compare.schemes", "must list at least one scheme");
    }
}

int run_n_steps(const RunConfig& config) {
    return static_cast<int>(std::llround(config.t_final / config.dt));
}

const char* run_scheme_name(RunScheme scheme) {
    switch (scheme) {
        case RunScheme::explicit_euler: return "explicit";
        case RunScheme::implicit_euler: return "implicit";
        case RunScheme::average: return "average";
        case RunScheme::reference: return "reference";
    }
    return "unknown";
}

RunScheme run_scheme_from_name(const std::string& name) {
    if (name == "explicit") return RunScheme::explicit_euler;
    if (name == "implicit") return RunScheme::implicit_euler;
    if (name == "average") return RunScheme::average;
    if (name == "reference") return RunScheme::reference;
    if (name == "midpoint") {
        throw std::invalid_argument(
            "scheme \"midpoint\" is recognized but deliberately unsupported: its update "
            "relation mixes the step endpoints in a way this discretization does not define; "
            "choose explicit, implicit, or average");
    }
    throw std::invalid_argument("unknown scheme \"" + name +
                                "\" (expected explicit, implicit, average, or reference)");
}

namespace {

RunConfig desk_gaussian(RunScheme scheme, const std::string& name) {
    RunConfig config;
    config.n_modes = 256;
    config.alpha = 1.0;
    config.scheme = scheme;
    config.dt = 0.01;
    config.t_final = 5.0;
    config.scenario.kind = ScenarioKind::gaussian;
    config.scenario.amplitude = 1.0;
    config.scenario.center = 0.0;
    config.scenario.sigma = 1.0;
    config.output.directory = "out/" + name;
    return config;
}

}  // namespace

RunConfig preset_config(const std::string& name) {
    if (name == "gaussian-hires") {
        RunConfig config = desk_gaussian(RunScheme::average, name);
        config.n_modes = 1000;
        config.output.stride = 5;
        return config;
    }
    if (name == "gaussian-explicit") return desk_gaussian(RunScheme::explicit_euler, name);
    if (name == "gaussian-implicit") return desk_gaussian(RunScheme::implicit_euler, name);
    if (name == "gaussian-average") return desk_gaussian(RunScheme::average, name);
    if (name == "peakon-pair") {
        RunConfig config;
        config.n_modes = 256;
        config.alpha = 1.0;
        config.scheme = RunScheme::average;
        config.dt = 0.005;
        config.t_final = 3.0;
        config.scenario.kind = ScenarioKind::peakon_pair;
        config.scenario.amplitude = 1.0;
        config.scenario.center = -std::numbers::pi / 2.0;
        config.scenario.amplitude2 = -1.0;
        config.scenario.center2 = std::numbers::pi / 2.0;
        config.output.directory = "out/peakon-pair";
        return config;
    }
    throw std::invalid_argument("unknown preset \"" + name + "\" (available: " +
                                [] {
                                    std::string all;
                                    for (const auto& n : preset_names()) {
                                        if (!all.empty()) all += ", ";
                                        all += n;
                                    }
                                    return all;
                                }() +
                                ")");
}

std::vector<std::string> preset_names() {
    return {"gaussian-hires", "gaussian-explicit", "gaussian-implicit", "gaussian-average",
            "peakon-pair"};
}

}  // namespace epdiff
