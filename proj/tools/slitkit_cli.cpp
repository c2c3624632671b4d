#include <CLI11.hpp>
#include <json.hpp>

#include <boost/version.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "slitkit/config.hpp"
#include "slitkit/errors.hpp"
#include "slitkit/experiments.hpp"
#include "slitkit/version.hpp"

namespace fs = std::filesystem;
using namespace slitkit;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigInvalid = 2, kRunError = 3 };

struct Request {
    std::string kind;
    std::string config_file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
    std::string out;
    bool print_config = false;
    bool quiet = false;
};

void add_common(CLI::App* sub, Request& req, std::map<std::string, CLI::Option*>& opts) {
    sub->add_option("--config", req.config_file, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", req.sets, "override key=value (repeatable)");
    sub->add_option("--out", req.out, "report directory");
    sub->add_flag("--print-config", req.print_config, "print the effective config and exit");
    sub->add_flag("-q,--quiet", req.quiet, "only print the verdict");
    for (const auto& f : config_schema()) {
        if (f.key == "kind" || f.key == "schema_version") continue;
        opts[f.key] = sub->add_option("--" + f.key, req.flags[f.key], f.help);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool has_kind_line(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t");
        if (b != std::string::npos && line.compare(b, 4, "kind") == 0) return true;
    }
    return false;
}

ExperimentConfig build_config(const Request& req, const std::map<std::string, CLI::Option*>& opts) {
    ExperimentConfig config = ExperimentConfig::defaults(req.kind);
    if (!req.config_file.empty()) {
        std::string text = read_file(req.config_file);
        if (!has_kind_line(text)) text = "kind = " + req.kind + "\n" + text;
        config = ExperimentConfig::parse(text);
        if (config.kind() != req.kind)
            throw ConfigInvalid("field 'kind': config file describes '" + config.kind() + "', command is '" +
                                req.kind + "'");
    }
    std::vector<std::string> errors;
    auto apply = [&](const std::string& key, const std::string& value) {
        try {
            config.set(key, value);
        } catch (const ConfigInvalid& e) {
            errors.push_back(std::string(e.what()).substr(std::string("ConfigInvalid: ").size()));
        }
    };
    for (const auto& s : req.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) errors.push_back("--set '" + s + "': expected key=value");
        else apply(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, opt] : opts)
        if (opt->count() > 0) apply(key, req.flags.at(key));
    if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
        throw ConfigInvalid(all);
    }
    config.validate();
    return config;
}

fs::path output_directory(const Request& req, const ExperimentConfig& config) {
    if (!req.out.empty()) return req.out;
    if (config.has_value("output_dir")) return config.get_text("output_dir");
    const char* root = std::getenv("SLITKIT_OUTPUT_ROOT");
    return fs::path(root && *root ? root : "slitkit_out") / config.kind();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

int execute(const Request& req, const std::map<std::string, CLI::Option*>& opts) {
    ExperimentConfig config;
    try {
        config = build_config(req, opts);
    } catch (const ConfigInvalid& e) {
        std::cerr << e.what() << '\n';
        return kConfigInvalid;
    }
    if (req.print_config) {
        std::cout << config.serialize();
        return kOk;
    }

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    try {
        report = run_experiment(config);
    } catch (const ConfigInvalid& e) {
        std::cerr << e.what() << '\n';
        return kConfigInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunError;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = output_directory(req, config);
    fs::create_directories(dir);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    auto emit = [&](const std::string& name, const std::string& content) {
        write_text(dir / name, content);
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(content)));
        files.push_back({{"name", name}, {"fnv1a", hex}, {"bytes", content.size()}});
    };
    emit("config.ini", config.serialize());
    emit("checks.csv", report.checks_csv());
    for (const auto& f : report.files) emit(f.name, f.content);

    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"criterion", c.criterion},
                          {"name", c.name},
                          {"passed", c.passed},
                          {"informational", c.informational},
                          {"measured", c.measured}});
    nlohmann::ordered_json manifest = {
        {"kind", config.kind()},
        {"schema_version", kSchemaVersion},
        {"config_hash", config.hash_hex()},
        {"passed", report.passed()},
        {"wall_time_s", wall},
        {"versions",
         {{"slitkit", kVersion},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION}}},
        {"checks", checks},
        {"files", files},
    };
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    if (!req.quiet) {
        for (const auto& c : report.checks) {
            const char* tag = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
            std::cout << tag << "  " << c.name;
            if (c.criterion > 0) std::cout << " [criterion " << c.criterion << "]";
            std::cout << ": " << c.measured << '\n';
        }
        std::cout << "reports in " << dir.string() << '\n';
    }
    std::cout << config.kind() << ": " << (report.passed() ? "pass" : "fail") << '\n';
    return report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slit-domain expansions, rate checks and free boundary runs"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Request req;
    // every experiment has its own subcommand; `run <kind>` is the generic form
    std::vector<std::pair<CLI::App*, std::string>> subs;
    for (const auto& kind : experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        subs.emplace_back(sub, kind);
    }
    CLI::App* run = app.add_subcommand("run", "run an experiment by kind");
    std::string run_kind;
    run->add_option("kind", run_kind, "experiment kind")->required()->check(CLI::IsMember(experiment_kinds()));

    // options are shared: only one subcommand is parsed per invocation
    std::vector<std::map<std::string, CLI::Option*>> per_sub(subs.size() + 1);
    for (std::size_t i = 0; i < subs.size(); ++i) add_common(subs[i].first, req, per_sub[i]);
    add_common(run, req, per_sub.back());

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i].first->parsed()) {
            req.kind = subs[i].second;
            return execute(req, per_sub[i]);
        }
    req.kind = run_kind;
    return execute(req, per_sub.back());
}
