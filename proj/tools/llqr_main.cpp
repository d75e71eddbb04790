// Command line front end: localizability checks, LLQR synthesis, closed-loop
// simulation and baseline comparison for linear distributed plants.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "llqr/baseline.hpp"
#include "llqr/controller.hpp"
#include "llqr/feasibility.hpp"
#include "llqr/io.hpp"
#include "llqr/llqr.hpp"
#include "llqr/plant.hpp"
#include "llqr/sparsity.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string plant = "chain59";
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

llqr::Plant resolve_plant(const std::string& source) {
    if (source == "chain59") return llqr::make_chain_benchmark();
    return llqr::load_plant(source);
}

llqr::CostWeights resolve_weights(const llqr::Plant& plant, const std::string& source) {
    if (source.empty() || source == "identity")
        return llqr::CostWeights::identity(plant.num_states(), plant.num_controls());
    std::ifstream is(source);
    if (!is) throw std::runtime_error("cannot open weights file " + source);
    llqr::Index n = 0, m = 0;
    if (!(is >> n >> m)) throw std::runtime_error("malformed weights header in " + source);
    const Eigen::MatrixXd q = llqr::read_matrix(is, n, n, "weights Q");
    const Eigen::MatrixXd r = llqr::read_matrix(is, m, m, "weights Rw");
    return llqr::CostWeights(q, r);
}

double parse_comm_speed(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF")
        return std::numeric_limits<double>::infinity();
    return std::stod(text);
}

void ensure_out_dir(const std::string& dir) {
    if (!dir.empty() && dir != ".") fs::create_directories(dir);
}

json json_speed(double h) {
    return std::isfinite(h) ? json(h) : json("inf");
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << doc.dump(2) << '\n';
}

// Parses "impulse:SITE:TIME" (1-based site), "awgn:VARIANCE", or "file:PATH"
// into a disturbance sequence of `steps` rows.
Eigen::MatrixXd resolve_disturbance(const std::string& spec, int steps, llqr::Index n,
                                    std::uint64_t seed) {
    const auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = s.find(':', start);
            parts.push_back(s.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return parts;
    };
    const auto parts = split(spec);
    if (parts.empty()) throw std::runtime_error("empty disturbance spec");
    if (parts[0] == "impulse") {
        if (parts.size() != 3) throw std::runtime_error("expected impulse:SITE:TIME");
        const llqr::Index site = std::stol(parts[1]) - 1;  // 1-based on the command line
        const int time = std::stoi(parts[2]);
        return llqr::impulse_disturbance(steps, n, site, time);
    }
    if (parts[0] == "awgn") {
        if (parts.size() != 2) throw std::runtime_error("expected awgn:VARIANCE");
        return llqr::awgn_disturbance(steps, n, std::stod(parts[1]), seed);
    }
    if (parts[0] == "file") {
        if (parts.size() != 2) throw std::runtime_error("expected file:PATH");
        std::ifstream is(parts[1]);
        if (!is) throw std::runtime_error("cannot open disturbance file " + parts[1]);
        llqr::Index rows = 0, cols = 0;
        if (!(is >> rows >> cols) || cols != n)
            throw std::runtime_error("disturbance file dimension mismatch");
        Eigen::MatrixXd w = llqr::read_matrix(is, rows, cols, "disturbance file");
        if (rows >= steps) return w.topRows(steps);
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(steps, n);
        padded.topRows(rows) = w;
        return padded;
    }
    throw std::runtime_error("unknown disturbance kind '" + parts[0] + "'");
}

// Flat key=value config lines, turned into "--key=value" tokens that are
// parsed ahead of the explicit flags (so the command line wins).
std::vector<std::string> config_as_arguments(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    const auto trim = [](std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return std::string();
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    };
    std::vector<std::string> args;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line is not key=value: " + trimmed);
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty() || key == "config")
            throw std::runtime_error("bad config key in line: " + trimmed);
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

json column_report(const std::vector<llqr::ColumnVerdict>& columns) {
    json out = json::array();
    for (const auto& c : columns)
        out.push_back({{"column", c.column + 1},
                       {"feasible", c.feasible},
                       {"residual", c.residual}});
    return out;
}

int run_check(const CommonOptions& common, int d, int T, const std::string& h_text,
              const std::string& report_path) {
    const llqr::Plant plant = resolve_plant(common.plant);
    const llqr::LocalizabilityReport report =
        llqr::check_localizable(plant, d, T, parse_comm_speed(h_text));

    ensure_out_dir(common.out_dir);
    json doc{{"plant", common.plant},
             {"n", plant.num_states()},
             {"m", plant.num_controls()},
             {"d", report.d},
             {"T", report.T},
             {"h", json_speed(report.h)},
             {"localizable", report.localizable},
             {"columns", column_report(report.columns)}};
    const std::string path =
        report_path.empty() ? common.out_dir + "/check_report.json" : report_path;
    write_json(path, doc);

    int infeasible = 0;
    for (const auto& c : report.columns) infeasible += c.feasible ? 0 : 1;
    std::cout << (report.localizable ? "localizable" : "not localizable") << " ("
              << report.columns.size() - infeasible << "/" << report.columns.size()
              << " columns feasible), report: " << path << '\n';
    return report.localizable ? kExitOk : kExitInfeasible;
}

int run_synth(const CommonOptions& common, int d, int T, const std::string& h_text,
              const std::string& weights_path, const std::string& maps_path,
              const std::string& report_path, bool with_baseline) {
    const llqr::Plant plant = resolve_plant(common.plant);
    const llqr::CostWeights weights = resolve_weights(plant, weights_path);
    const double h = parse_comm_speed(h_text);

    const llqr::LocalizedConstraints constraints = llqr::build_localized_fir_constraints(
        plant.A_pattern(), plant.B_pattern(), d, T, h);
    const llqr::SynthesisResult synth =
        llqr::synthesize_llqr(plant, constraints.state_space, constraints.control_space, T, weights);

    if (!synth.feasible) {
        std::cerr << "infeasible columns (1-based):";
        for (llqr::Index j : synth.infeasible_columns) std::cerr << ' ' << j + 1;
        std::cerr << '\n';
        return kExitInfeasible;
    }

    ensure_out_dir(common.out_dir);
    const std::string out_maps =
        maps_path.empty() ? common.out_dir + "/maps.txt" : maps_path;
    llqr::save_maps(out_maps, *synth.maps);

    std::cout.precision(6);
    std::cout << "objective = " << synth.objective << '\n';
    std::optional<double> baseline;
    if (with_baseline) {
        baseline = llqr::centralized_h2_objective(plant, weights);
        std::cout << "centralized objective = " << *baseline << '\n';
        std::cout << "normalized objective = " << std::sqrt(synth.objective / *baseline) << '\n';
    }
    std::cout << "maps: " << out_maps << '\n';

    if (!report_path.empty()) {
        json columns = json::array();
        for (const auto& c : synth.columns)
            columns.push_back({{"column", c.column + 1},
                               {"feasible", c.feasible},
                               {"objective", c.objective},
                               {"residual", c.residual},
                               {"solve_seconds", c.solve_seconds}});
        json doc{{"plant", common.plant},
                 {"d", d},
                 {"T", T},
                 {"h", json_speed(h)},
                 {"objective", synth.objective},
                 {"columns", columns}};
        if (baseline) {
            doc["centralized_objective"] = *baseline;
            doc["normalized_objective"] = std::sqrt(synth.objective / *baseline);
        }
        write_json(report_path, doc);
    }
    return kExitOk;
}

int run_simulate(const CommonOptions& common, const std::string& maps_path,
                 const std::string& disturbance, int steps, const std::string& scheme_text,
                 double perturb_scale) {
    const llqr::Plant plant = resolve_plant(common.plant);
    llqr::ClosedLoopMaps maps = llqr::load_maps(maps_path);
    if (maps.num_states() != plant.num_states() ||
        maps.num_controls() != plant.num_controls())
        throw std::runtime_error("maps/plant dimension mismatch");

    if (perturb_scale != 0.0) {
        std::mt19937_64 rng(common.seed);
        std::uniform_real_distribution<double> uniform(-perturb_scale, perturb_scale);
        std::vector<Eigen::MatrixXd> deltas(
            static_cast<std::size_t>(std::max(0, maps.horizon() - 1)));
        for (auto& delta : deltas) {
            delta.resize(plant.num_states(), plant.num_states());
            for (llqr::Index i = 0; i < plant.num_states(); ++i)
                for (llqr::Index j = 0; j < plant.num_states(); ++j) delta(i, j) = uniform(rng);
        }
        maps = llqr::perturb_maps(plant, maps, deltas);
    }

    const Eigen::MatrixXd w_seq =
        resolve_disturbance(disturbance, steps, plant.num_states(), common.seed);
    const llqr::Scheme scheme =
        scheme_text == "naive" ? llqr::Scheme::naive : llqr::Scheme::receding;
    const llqr::SimTrace trace = llqr::simulate(plant, maps, w_seq, scheme);

    ensure_out_dir(common.out_dir);
    llqr::export_trace(common.out_dir, trace);
    std::cout << "simulated " << trace.steps << " steps, logs in " << common.out_dir << '\n';
    if (trace.overflow) {
        std::cerr << "state overflow (|x| > 1e12) at step " << trace.overflow_step
                  << "; simulation aborted\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int run_compare(const CommonOptions& common, int d, int T, const std::string& h_text,
                const std::string& weights_path, const std::string& json_path) {
    const llqr::Plant plant = resolve_plant(common.plant);
    const llqr::CostWeights weights = resolve_weights(plant, weights_path);
    const double h = parse_comm_speed(h_text);

    const double centralized = llqr::centralized_h2_objective(plant, weights);
    const llqr::LocalizedConstraints constraints = llqr::build_localized_fir_constraints(
        plant.A_pattern(), plant.B_pattern(), d, T, h);
    const llqr::SynthesisResult synth =
        llqr::synthesize_llqr(plant, constraints.state_space, constraints.control_space, T, weights);
    if (!synth.feasible) {
        std::cerr << "synthesis infeasible; cannot compare\n";
        return kExitInfeasible;
    }
    const double normalized = std::sqrt(synth.objective / centralized);
    const long locality_max = plant.num_states() - 1;

    std::ostringstream h_text_out;
    h_text_out.precision(6);
    h_text_out << h;
    std::cout.precision(6);
    std::cout << std::left << std::setw(13) << "scheme" << std::setw(12) << "comm_speed"
              << std::setw(14) << "control_time" << std::setw(10) << "locality"
              << "objective\n";
    std::cout << std::setw(13) << "centralized" << std::setw(12) << "inf" << std::setw(14)
              << "inf" << std::setw(10) << ("max(" + std::to_string(locality_max) + ")")
              << "1\n";
    std::cout << std::setw(13) << "llqr" << std::setw(12) << h_text_out.str() << std::setw(14)
              << T << std::setw(10) << d << normalized << '\n';

    ensure_out_dir(common.out_dir);
    json doc{{"plant", common.plant},
             {"centralized",
              {{"comm_speed", "inf"},
               {"control_time", "inf"},
               {"locality", locality_max},
               {"objective", centralized},
               {"normalized_objective", 1.0}}},
             {"llqr",
              {{"comm_speed", json_speed(h)},
               {"control_time", T},
               {"locality", d},
               {"objective", synth.objective},
               {"normalized_objective", normalized}}}};
    const std::string path =
        json_path.empty() ? common.out_dir + "/compare.json" : json_path;
    write_json(path, doc);
    std::cout << "report: " << path << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized LQR synthesis and simulation for distributed plants"};
    app.set_help_flag("--help", "print help and exit");  // keep -h free for --h
    app.require_subcommand(1);

    CommonOptions common;
    int d = 0;
    int T = 2;
    std::string h_text = "1";
    std::string weights_path;
    std::string maps_path;
    std::string report_path;
    std::string disturbance;
    std::string scheme_text = "receding";
    int steps = 100;
    double perturb_scale = 0.0;
    bool with_baseline = false;

    std::string config_path;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->set_help_flag("--help", "print help and exit");
        cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--config", config_path, "key=value file mirroring the flags");
        cmd->add_option("--plant", common.plant, "builtin 'chain59' or a plant file path");
        cmd->add_option("--out", common.out_dir, "output directory");
        cmd->add_option("--seed", common.seed, "seed for all randomness");
    };
    const auto add_constraint_flags = [&](CLI::App* cmd) {
        cmd->add_option("--d", d, "locality radius (hops)")->required();
        cmd->add_option("--T", T, "FIR horizon (taps)")->required();
        cmd->add_option("--h", h_text, "communication speed ratio (>= 1 or 'inf')")->required();
    };

    CLI::App* check = app.add_subcommand("check", "decide (d,T) localizability per column");
    add_common(check);
    add_constraint_flags(check);
    check->add_option("--report", report_path, "JSON report path");

    CLI::App* synth = app.add_subcommand("synth", "synthesize the LLQR closed-loop maps");
    add_common(synth);
    add_constraint_flags(synth);
    synth->add_option("--weights", weights_path, "'identity' or a weights file");
    synth->add_option("--maps-out", maps_path, "output maps file");
    synth->add_option("--report", report_path, "JSON report path");
    synth->add_flag("--baseline", with_baseline, "also solve the centralized baseline");

    CLI::App* simulate = app.add_subcommand("simulate", "roll the closed loop forward");
    add_common(simulate);
    simulate->add_option("--maps", maps_path, "maps file from synth")->required();
    simulate->add_option("--disturbance", disturbance,
                         "impulse:SITE:TIME | awgn:VARIANCE | file:PATH")
        ->required();
    simulate->add_option("--N", steps, "number of steps")->required();
    simulate->add_option("--scheme", scheme_text, "receding | naive")
        ->check(CLI::IsMember({"receding", "naive"}));
    simulate->add_option("--perturb", perturb_scale, "random map perturbation magnitude");

    CLI::App* compare = app.add_subcommand("compare", "LLQR vs centralized baseline table");
    add_common(compare);
    add_constraint_flags(compare);
    compare->add_option("--weights", weights_path, "'identity' or a weights file");
    compare->add_option("--json", report_path, "JSON output path");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        std::string early_config;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size())
                early_config = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0)
                early_config = args[i].substr(9);
        }
        if (!early_config.empty() && !args.empty()) {
            const std::vector<std::string> from_file = config_as_arguments(early_config);
            args.insert(args.begin() + 1, from_file.begin(), from_file.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::vector<const char*> parse_argv;
    parse_argv.push_back(argv[0]);
    for (const auto& arg : args) parse_argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(parse_argv.size()), parse_argv.data());
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) return run_check(common, d, T, h_text, report_path);
        if (synth->parsed())
            return run_synth(common, d, T, h_text, weights_path, maps_path, report_path,
                             with_baseline);
        if (simulate->parsed())
            return run_simulate(common, maps_path, disturbance, steps, scheme_text,
                                perturb_scale);
        if (compare->parsed())
            return run_compare(common, d, T, h_text, weights_path, report_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
