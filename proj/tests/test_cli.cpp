#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "llqr/plant.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef LLQR_CLI_PATH
#error "LLQR_CLI_PATH must point at the built command line binary"
#endif

int run_cli(const std::string& args) {
    const std::string command = std::string(LLQR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::stringstream buffer;
    buffer << is.rdbuf();
    return buffer.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("check verdicts and exit codes") {
    TempDir dir("llqr_cli_check");
    CHECK(run_cli("check --plant chain59 --d 9 --T 29 --h 1.5 --out " + dir.path.string()) == 0);
    CHECK(fs::exists(dir.path / "check_report.json"));

    // same chain with all actuation removed: every column infeasible
    llqr::Plant chain = llqr::make_chain_benchmark();
    const llqr::Plant unactuated(chain.A(), Eigen::MatrixXd::Zero(59, 0));
    const auto plant_path = dir.path / "unactuated.txt";
    llqr::save_plant(plant_path.string(), unactuated);
    CHECK(run_cli("check --plant " + plant_path.string() + " --d 9 --T 29 --h 1.5 --out " +
                  dir.path.string()) == 1);

    CHECK(run_cli("check --plant chain59 --T 29 --h 1.5") == 2);  // --d missing
    CHECK(run_cli("check --plant chain59 --d 9 --T 29 --h 0.2") == 2);
    CHECK(run_cli("check --plant /nonexistent.txt --d 1 --T 4 --h 1.5") == 2);
}

TEST_CASE("synth, simulate and compare round trip") {
    TempDir dir("llqr_cli_pipeline");
    const std::string out = dir.path.string();

    CHECK(run_cli("synth --plant chain59 --d 9 --T 29 --h 1.5 --out " + out + " --report " +
                  out + "/synth.json") == 0);
    CHECK(fs::exists(dir.path / "maps.txt"));
    CHECK(fs::exists(dir.path / "synth.json"));

    const std::string sim_args = " --plant chain59 --maps " + out +
                                 "/maps.txt --disturbance impulse:30:50 --N 100 --seed 7";
    CHECK(run_cli("simulate" + sim_args + " --out " + out + "/run1") == 0);
    CHECK(run_cli("simulate" + sim_args + " --out " + out + "/run2") == 0);
    for (const char* name : {"x.csv", "u.csv", "we.csv", "w.csv", "x_logmag.csv"}) {
        CAPTURE(name);
        CHECK(slurp(dir.path / "run1" / name) == slurp(dir.path / "run2" / name));
    }

    // maps written and re-read produce the canonical localized response
    const std::string x_csv = slurp(dir.path / "run1" / "x.csv");
    std::stringstream lines(x_csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header.substr(0, 5) == "t,x1,");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 100);

    CHECK(run_cli("compare --plant chain59 --d 9 --T 29 --h 1.5 --out " + out) == 0);
    const std::string compare_json = slurp(dir.path / "compare.json");
    CHECK(compare_json.find("normalized_objective") != std::string::npos);

    // zero disturbance produces all-zero logs
    CHECK(run_cli("simulate --plant chain59 --maps " + out +
                  "/maps.txt --disturbance awgn:0.0 --N 20 --out " + out + "/zero") == 0);
    const std::string zero_x = slurp(dir.path / "zero" / "x.csv");
    CHECK(zero_x.find("-") == std::string::npos);  // no negative entries anywhere

    // dimension mismatch between maps and plant
    const auto small_path = dir.path / "small.txt";
    {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
        llqr::save_plant(small_path.string(), llqr::Plant(a, a));
    }
    CHECK(run_cli("simulate --plant " + small_path.string() + " --maps " + out +
                  "/maps.txt --disturbance impulse:1:0 --N 10 --out " + out) == 2);
}

TEST_CASE("naive scheme with perturbed maps overflows") {
    TempDir dir("llqr_cli_naive");
    const std::string out = dir.path.string();
    REQUIRE(run_cli("synth --plant chain59 --d 9 --T 29 --h 1.5 --out " + out) == 0);
    CHECK(run_cli("simulate --plant chain59 --maps " + out +
                  "/maps.txt --disturbance impulse:30:0 --N 1000 --scheme naive "
                  "--perturb 1e-6 --seed 3 --out " +
                  out + "/naive") == 1);
}

TEST_CASE("config file supplies defaults, flags override") {
    TempDir dir("llqr_cli_config");
    const auto plant_path = dir.path / "five.txt";
    {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            a(i, i) = 1.0;
            if (i + 1 < 5) {
                a(i, i + 1) = 0.2;
                a(i + 1, i) = -0.2;
            }
        }
        llqr::save_plant(plant_path.string(), llqr::Plant(a, Eigen::MatrixXd::Identity(5, 5)));
    }
    const auto config_path = dir.path / "run.cfg";
    {
        std::ofstream os(config_path);
        os << "plant=" << plant_path.string() << "\nd=2\nT=6\nh=1.5\nout="
           << dir.path.string() << "\n";
    }
    CHECK(run_cli("check --config " + config_path.string()) == 0);
    CHECK(fs::exists(dir.path / "check_report.json"));
    const std::string report = slurp(dir.path / "check_report.json");
    CHECK(report.find("\"d\": 2") != std::string::npos);

    // command line wins over the file
    CHECK(run_cli("check --config " + config_path.string() + " --d 3") == 0);
    const std::string overridden = slurp(dir.path / "check_report.json");
    CHECK(overridden.find("\"d\": 3") != std::string::npos);
}
