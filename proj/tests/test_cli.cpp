#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lmcf/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = LMCF_CLI_PATH;

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lmcf_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("verify exits zero and reruns are byte-identical") {
    const auto dir = fresh_dir("det");
    const auto cmd = "verify --family grim-reaper --h 0.02 --out " + dir.string();
    CHECK(run_cli(cmd) == 0);
    std::vector<std::string> first;
    for (const char* name : {"report.json", "summary.txt", "patch.csv"})
        first.push_back(slurp(dir / name));
    CHECK(run_cli(cmd) == 0);
    int i = 0;
    for (const char* name : {"report.json", "summary.txt", "patch.csv"}) {
        CAPTURE(name);
        REQUIRE(!first[i].empty());
        CHECK(first[i] == slurp(dir / name));
        ++i;
    }
}

TEST_CASE("reports embed the effective config and flags override the file") {
    const auto dir = fresh_dir("cfg");
    const auto cfg_path = fs::temp_directory_path() / "lmcf_cli_config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"family": "grim-reaper", "h": 0.1, "tol": 1e-3})" << '\n';
    }
    CHECK(run_cli("verify --config " + cfg_path.string() + " --h 0.02 --out " + dir.string()) == 0);
    std::ifstream in(dir / "report.json");
    nlohmann::json report;
    in >> report;
    CHECK(report.at("config").at("h").get<double>() == 0.02);  // flag wins
    CHECK(report.at("config").at("family").get<std::string>() == "grim-reaper");
    CHECK(report.at("config").at("seed").get<long>() == 42);
}

TEST_CASE("exit codes: validation, numerical, invariant violation") {
    const auto dir = fresh_dir("codes");
    // 1: bad spacing
    CHECK(run_cli("verify --family grim-reaper --h -0.5 --out " + dir.string()) == 1);
    // 1: verify needs a translating family
    CHECK(run_cli("verify --family product --h 0.05 --out " + dir.string()) == 1);
    // 2: every probed scale ambiguous (reaper sheets at the coarsest scale)
    CHECK(run_cli("blowdown --family grim-reaper --scales 1e-1 --out " + dir.string()) == 2);
    // 3: unreachable tolerance, report still written
    const auto strict = fresh_dir("strict");
    CHECK(run_cli("verify --family grim-reaper --h 0.05 --tol 1e-12 --out " + strict.string()) == 3);
    CHECK(fs::exists(strict / "report.json"));
    CHECK(fs::exists(strict / "summary.txt"));
}

TEST_CASE("blowdown reports the verdict") {
    const auto dir = fresh_dir("bd");
    CHECK(run_cli("blowdown --family plane --alpha 0.4 --scales 1e-1,1e-2 --out " +
                  dir.string()) == 0);
    std::ifstream in(dir / "report.json");
    nlohmann::json report;
    in >> report;
    CHECK(report.at("probe").at("verdict").get<std::string>() == "static");
}

TEST_CASE("curve CSV round trip") {
    const auto w = lmcf::curves::expander_curve(0.8, 12.0, 0.01);
    const auto pair = lmcf::curves::double_curve(w);
    std::stringstream ss;
    lmcf::io::write_curve_csv(ss, pair);
    const auto back = lmcf::io::read_curve_csv(ss);
    REQUIRE(back.components.size() == 2);
    for (int c = 0; c < 2; ++c) {
        REQUIRE(back.components[c].size() == pair.components[c].size());
        for (std::size_t i = 0; i < back.components[c].size(); ++i)
            CHECK(std::abs(back.components[c].points[i] - pair.components[c].points[i]) == 0.0);
    }
}
