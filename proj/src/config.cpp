#include "slitkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

using F = FieldType;

std::vector<ConfigField> build_schema() {
    std::vector<ConfigField> s = {
        {"schema_version", F::Int, "1", "config format version", {}, 1, 1},
        {"kind", F::Choice, "rates", "experiment to run", experiment_kinds()},
        {"geometry", F::Choice, "graph", "flat edge or graph of g", {"flat", "graph"}},
        {"g", F::Rationals, "0,0,1/4", "ascending coefficients of g (geometry = graph)", {}},
        {"n", F::Int, "2", "dimension of the edge space", {}, 1, 2},
        {"k", F::Int, "0", "regularity order", {}, 0, 4},
        {"phi", F::Choice, "flat_u0", "Dirichlet data", {"u0", "flat_u0", "cos_half"}},
        {"phi_scale", F::Real, "1", "multiplier of the data", {}},
        {"G", F::Reals, "1", "ascending coefficients of the flux G(gamma)", {}},
        {"bracket", F::Reals, "-0.5,0.5", "tip search interval lo,hi", {}, -1, 1},
        {"scan_points", F::Int, "33", "coarse scan points for the tip", {}, 2, 10000},
        {"expected_gamma", F::OptionalReal, "", "tip location asserted by the run (empty: none)", {}},
        {"cells", F::Int, "64", "sqrt-graded cells along a", {}, 4, 1024},
        {"trace_cells", F::Int, "32", "sqrt-graded cells for the quotient trace", {}, 16, 1024},
        {"levels", F::Ints, "5,6,7,8", "uniform grids h = 2^-level", {}, 2, 12},
        {"fd_level", F::Int, "9", "uniform level of the tip oracle", {}, 3, 12},
        {"energy_level", F::Int, "8", "uniform level of the energy grid", {}, 3, 12},
        {"scales", F::Reals, "0.5,0.25,0.125,0.0625,0.03125", "dyadic radii, decreasing", {}, 0, 1},
        {"lambda0", F::Real, "0.25", "outer radius of the tangent fit", {}, 0, 1},
        {"alpha", F::Real, "0.5", "Holder exponent", {}, 0, 1},
        {"gamma_probe", F::Real, "0.3", "tip location of the oracle comparison", {}, -0.9, 0.9},
        {"whitney_ks", F::Ints, "0,1", "orders of the Whitney checks (k is always included)", {}, 0, 4},
        {"approach", F::Reals, "0.2,0.1,0.05,0.025,0.0125", "normal distances of the jet defect", {}, 0, 1},
        {"normal_steps", F::Reals, "0.01,0.001,0.0001,1e-05", "normal steps t of the Neumann check", {}, 0, 1},
        {"Q", F::Rationals, "0,0,1", "ascending coefficients of the tangential datum in x1", {}},
        {"parts", F::Choice, "all", "Neumann checks to run", {"all", "constant", "quotient"}},
        {"seed", F::Int, "1", "seed of the sample-point jitter", {}, 0, 4294967295.0},
        {"svg", F::Bool, "true", "write log-log plots", {}},
        {"output_dir", F::Text, "", "report directory (empty: $SLITKIT_OUTPUT_ROOT/<kind>)", {}},
        {"max_kernel_seconds", F::Real, "1", "runtime bound of the kernel check", {}, 0},
        {"min_oracle_order", F::Real, "0.9", "minimum order in h of the oracle comparison", {}, 0},
        {"max_oracle_seconds", F::Real, "120", "runtime bound of the oracle comparison", {}, 0},
        {"min_rate", F::Real, "1.3", "minimum decay exponent of u/U0 - P0", {}, 0},
        {"max_log_residual", F::Real, "0.3", "maximum RMS log residual of a rate fit", {}, 0},
        {"min_gradient_rate", F::Real, "1.3", "minimum decay exponent of the gradient", {}, 0},
        {"max_rates_seconds", F::Real, "600", "runtime bound of the rate run", {}, 0},
        {"barrier_stability", F::Real, "0.1", "relative change allowed under refinement", {}, 0},
        {"moment_tol", F::Real, "1e-12", "mollifier moment tolerance", {}, 0},
        {"reproduction_tol", F::Real, "1e-8", "flat reproduction tolerance", {}, 0},
        {"normal_tol", F::Real, "1e-3", "tolerance of T_nu at the smallest distance", {}, 0},
        {"min_quotient_rate", F::Real, "2.2", "minimum decay exponent of the quotient", {}, 0},
        {"trace_tol", F::Real, "0.1", "relative trace tolerance", {}, 0},
        {"gamma_tol", F::Real, "1e-6", "tolerance on the tip location", {}, 0},
        {"oracle_rel_tol", F::Real, "0.01", "relative gap to the tip oracle", {}, 0},
        {"linearity_tol", F::Real, "1e-12", "relative linearity defect", {}, 0},
        {"energy_rel_tol", F::Real, "0.01", "relative energy tolerance", {}, 0},
    };
    return s;
}

const std::map<std::string, std::map<std::string, std::string>>& kind_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> d = {
        {"solve", {{"geometry", "flat"}, {"n", "1"}, {"phi", "u0"}}},
        {"expand", {{"geometry", "flat"}}},
        {"rates", {}},
        {"whitney", {}},
        {"neumann", {}},
        {"freeboundary", {{"geometry", "flat"}, {"n", "1"}, {"phi", "cos_half"}, {"expected_gamma", "0"}}},
        {"barrier", {{"cells", "16"}}},
        {"energy", {{"geometry", "flat"}, {"n", "1"}, {"phi", "u0"}}},
    };
    return d;
}

const ConfigField* find_field(const std::string& key) {
    for (const auto& f : config_schema())
        if (f.key == key) return &f;
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_long(const std::string& s, long& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// reals also accept p/q
bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        if (s.find('/') != std::string::npos) {
            out = to_double(parse_rational(s));
            return std::isfinite(out);
        }
    } catch (const std::exception&) {
        return false;
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

// canonical text of one value, or an error message
std::string canonical(const ConfigField& f, const std::string& value, std::string& error) {
    auto bounded = [&](double v) {
        if (v < f.min || v > f.max) {
            std::ostringstream os;
            os << "value " << format_real(v) << " outside [" << format_real(f.min) << ", " << format_real(f.max)
               << "]";
            error = os.str();
            return false;
        }
        return true;
    };
    switch (f.type) {
    case F::Int: {
        long v;
        if (!parse_long(value, v)) {
            error = "expected an integer, got '" + value + "'";
            return {};
        }
        return bounded(static_cast<double>(v)) ? std::to_string(v) : std::string{};
    }
    case F::Real:
    case F::OptionalReal: {
        if (f.type == F::OptionalReal && value.empty()) return {};
        double v;
        if (!parse_real(value, v)) {
            error = "expected a number, got '" + value + "'";
            return {};
        }
        return bounded(v) ? format_real(v) : std::string{};
    }
    case F::Bool: {
        std::string l = value;
        std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
        if (l == "true" || l == "1" || l == "yes" || l == "on") return "true";
        if (l == "false" || l == "0" || l == "no" || l == "off") return "false";
        error = "expected true or false, got '" + value + "'";
        return {};
    }
    case F::Text:
        return value;
    case F::Choice:
        if (std::find(f.choices.begin(), f.choices.end(), value) == f.choices.end()) {
            std::string all;
            for (const auto& c : f.choices) all += (all.empty() ? "" : "|") + c;
            error = "expected one of " + all + ", got '" + value + "'";
            return {};
        }
        return value;
    case F::Reals:
    case F::Ints:
    case F::Rationals: {
        const auto items = split_list(value);
        if (items.empty()) {
            error = "expected a non-empty comma-separated list";
            return {};
        }
        std::string out;
        for (const auto& item : items) {
            std::string c;
            if (f.type == F::Ints) {
                long v;
                if (!parse_long(item, v)) {
                    error = "expected integers, got '" + item + "'";
                    return {};
                }
                if (!bounded(static_cast<double>(v))) return {};
                c = std::to_string(v);
            } else if (f.type == F::Reals) {
                double v;
                if (!parse_real(item, v)) {
                    error = "expected numbers, got '" + item + "'";
                    return {};
                }
                if (!bounded(v)) return {};
                c = format_real(v);
            } else {
                try {
                    c = to_string(parse_rational(item));
                } catch (const std::exception&) {
                    error = "expected rationals p/q or decimals, got '" + item + "'";
                    return {};
                }
            }
            out += (out.empty() ? "" : ",") + c;
        }
        return out;
    }
    }
    return value;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"solve",        "expand",  "rates",  "whitney",
                                                   "neumann",      "freeboundary", "barrier", "energy"};
    return kinds;
}

const std::vector<ConfigField>& config_schema() {
    static const std::vector<ConfigField> schema = build_schema();
    return schema;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& kind) {
    const auto& kd = kind_defaults();
    const auto it = kd.find(kind);
    if (it == kd.end()) throw ConfigInvalid("field 'kind': unknown experiment '" + kind + "'");
    ExperimentConfig c;
    for (const auto& f : config_schema()) c.values_[f.key] = f.fallback;
    c.values_["kind"] = kind;
    for (const auto& [k, v] : it->second) c.values_[k] = v;
    for (const auto& f : config_schema()) {
        std::string error;
        const std::string raw = c.values_[f.key];
        const std::string canon = canonical(f, raw, error);
        if (!error.empty()) throw std::logic_error("bad default for " + f.key + ": " + error);
        if (!(f.type == F::OptionalReal && raw.empty())) c.values_[f.key] = canon;
    }
    return c;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> errors;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    std::string kind = "rates";
    for (const auto& [k, v] : entries)
        if (k == "kind") kind = v;
    if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
        throw ConfigInvalid("field 'kind': unknown experiment '" + kind + "'");
    ExperimentConfig c = defaults(kind);
    std::map<std::string, int> seen;
    for (const auto& [k, v] : entries) {
        if (++seen[k] == 2) errors.push_back("field '" + k + "': given more than once");
        try {
            c.set(k, v);
        } catch (const ConfigInvalid& e) {
            errors.push_back(std::string(e.what()).substr(std::string("ConfigInvalid: ").size()));
        }
    }
    if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
        throw ConfigInvalid(all);
    }
    c.validate();
    return c;
}

std::string ExperimentConfig::serialize() const {
    std::string out;
    for (const auto& f : config_schema()) out += f.key + " = " + values_.at(f.key) + "\n";
    return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(serialize()); }

std::string ExperimentConfig::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const ConfigField* f = find_field(key);
    if (!f) throw ConfigInvalid("field '" + key + "': unknown key");
    std::string error;
    std::string c = canonical(*f, trim(value), error);
    if (!error.empty()) throw ConfigInvalid("field '" + key + "': " + error);
    if (key == "kind" && c != raw("kind"))
        throw ConfigInvalid("field 'kind': fixed at '" + raw("kind") + "'; start from defaults(\"" + c + "\")");
    values_[key] = c;
}

const std::string& ExperimentConfig::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigInvalid("field '" + key + "': unknown key");
    return it->second;
}

long ExperimentConfig::get_int(const std::string& key) const { return std::stol(raw(key)); }

double ExperimentConfig::get_real(const std::string& key) const {
    double v = 0.0;
    parse_real(raw(key), v);
    return v;
}

bool ExperimentConfig::get_bool(const std::string& key) const { return raw(key) == "true"; }

std::vector<double> ExperimentConfig::get_reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) {
        double v = 0.0;
        parse_real(item, v);
        out.push_back(v);
    }
    return out;
}

std::vector<long> ExperimentConfig::get_ints(const std::string& key) const {
    std::vector<long> out;
    for (const auto& item : split_list(raw(key))) out.push_back(std::stol(item));
    return out;
}

std::vector<Rational> ExperimentConfig::get_rationals(const std::string& key) const {
    std::vector<Rational> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_rational(item));
    return out;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errors;
    if (raw("geometry") == "graph" && get_int("n") != 2) errors.push_back("field 'geometry': graph requires n = 2");
    const std::string kind = raw("kind");
    if ((kind == "solve" || kind == "energy" || kind == "freeboundary") && get_int("n") != 1)
        errors.push_back("field 'n': " + kind + " runs on the n = 1 slit");
    if ((kind == "rates" || kind == "neumann" || kind == "whitney") && get_int("n") != 2)
        errors.push_back("field 'n': " + kind + " runs on the n = 2 slit");
    if (get_reals("bracket").size() != 2) errors.push_back("field 'bracket': expected lo,hi");
    else if (get_reals("bracket")[0] >= get_reals("bracket")[1]) errors.push_back("field 'bracket': lo must be < hi");
    auto decreasing = [&](const std::string& key, std::size_t min_size) {
        const auto v = get_reals(key);
        if (v.size() < min_size)
            errors.push_back("field '" + key + "': need at least " + std::to_string(min_size) + " entries");
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) {
                errors.push_back("field '" + key + "': entries must be strictly decreasing");
                break;
            }
    };
    decreasing("scales", 4);
    decreasing("approach", 3);
    decreasing("normal_steps", 2);
    const auto levels = get_ints("levels");
    if (levels.size() < 4) errors.push_back("field 'levels': need at least 4 grids");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1]) {
            errors.push_back("field 'levels': entries must be strictly increasing");
            break;
        }
    if (get_real("phi_scale") <= 0.0) errors.push_back("field 'phi_scale': must be positive");
    if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
        throw ConfigInvalid(all);
    }
}

}  // namespace slitkit
