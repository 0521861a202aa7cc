#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "mfshift/measures.hpp"
#include "mfshift/text.hpp"

using namespace mfshift;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

std::string cli_path() {
    const char* p = std::getenv("MFSHIFT_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "MFSHIFT_CLI_PATH must point at the binary");
    return p;
}

std::string data_dir() {
    const char* p = std::getenv("MFSHIFT_DATA_DIR");
    REQUIRE_MESSAGE(p != nullptr, "MFSHIFT_DATA_DIR must point at the JSON files");
    return p;
}

RunResult run_cli(const std::string& args) {
    const std::string cmd = "'" + cli_path() + "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("solve reports the fixed point of the parity potential") {
    RunResult r = run_cli("solve --potential '" + data_dir() +
                          "/example2.json' --s 1 --tol 1e-13");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    REQUIRE(ls.size() >= 4);
    CHECK(ls[0] == "length,word,index,log_psi,psi");
    bool found = false;
    for (const auto& line : ls) {
        auto f = split_csv(line);
        if (f.size() == 5 && f[0] == "1" && f[1] == "0") {
            found = true;
            const double psi = std::stod(f[4]);
            CHECK(psi == doctest::Approx(std::exp(1.0) + std::exp(-1.0)).epsilon(1e-10));
        }
    }
    CHECK(found);
    CHECK(r.output.find("converged=yes") != std::string::npos);
}

TEST_CASE("pressure grid rows carry reproducible formatting") {
    RunResult r = run_cli("pressure --potential '" + data_dir() +
                          "/example2.json' --s-grid -1:1:0.5");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    REQUIRE(ls.size() >= 6);
    CHECK(ls[0] == "s,pressure,derivative");
    int rows = 0;
    for (size_t i = 1; i < ls.size(); ++i) {
        auto f = split_csv(ls[i]);
        if (f.size() != 3) continue;
        ++rows;
        const double s = std::stod(f[0]);
        const double want =
            std::log(2.0) + std::log(std::exp(s) + std::exp(-s));
        CHECK(std::stod(f[1]) == doctest::Approx(want).epsilon(1e-9));
        CHECK(std::stod(f[2]) == doctest::Approx(std::tanh(s)).scale(1.0).epsilon(1e-7));
    }
    CHECK(rows == 5);
}

TEST_CASE("spectrum rows include status labels") {
    RunResult r = run_cli("spectrum --potential '" + data_dir() +
                          "/example1.json' --alpha-grid 0:1:0.25");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    REQUIRE(ls.size() >= 6);
    CHECK(ls[0] == "alpha,s_star,pressure,legendre,dimension,status");
    bool quarter = false;
    for (size_t i = 1; i < ls.size(); ++i) {
        auto f = split_csv(ls[i]);
        if (f.size() != 6) continue;
        if (std::fabs(std::stod(f[0]) - 0.25) < 1e-12) {
            quarter = true;
            CHECK(std::stod(f[4]) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(f[5] == "interior");
        }
        if (std::fabs(std::stod(f[0]) - 0.0) < 1e-12)
            CHECK(f[5] == "endpoint_lower");
    }
    CHECK(quarter);
}

TEST_CASE("extremal prints witnesses for the indicator potential") {
    RunResult r = run_cli("extremal --potential '" + data_dir() + "/example1.json'");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("min: alpha=") != std::string::npos);
    CHECK(r.output.find("attained=yes witness=0") != std::string::npos);
    CHECK(r.output.find("attained=yes witness=1") != std::string::npos);
}

TEST_CASE("measure-dim matches the library byte for byte") {
    RunResult r = run_cli("measure-dim --base lebesgue --m 2 --q 2 --tol 1e-9");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    REQUIRE(ls.size() >= 2);
    CHECK(ls[0] == "dimension,tail_bound,terms,tol_met");
    auto f = split_csv(ls[1]);
    REQUIRE(f.size() == 4);
    LebesgueOracle leb(2);
    SeriesResult want = telescopic_dimension(leb, 2, 1e-9);
    CHECK(f[0] == format_double(want.value));
    CHECK(f[1] == format_double(want.tail_bound));
    CHECK(f[3] == "yes");

    RunResult b = run_cli("measure-dim --base bernoulli --probs 0.2,0.8 --q 3");
    CHECK(b.exit_code == 0);
    auto bl = lines_of(b.output);
    REQUIRE(bl.size() >= 2);
    CHECK(std::stod(split_csv(bl[1])[0]) ==
          doctest::Approx(0.7219280948873623).epsilon(1e-8));
}

TEST_CASE("sample output is seed-deterministic") {
    const std::string args = "sample --potential '" + data_dir() +
                             "/example2.json' --s 1 --n 64 --seed 11";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
    RunResult c = run_cli("sample --potential '" + data_dir() +
                          "/example2.json' --s 1 --n 64 --seed 12");
    CHECK(a.output != c.output);
    auto ls = lines_of(a.output);
    CHECK(ls[0] == "k,symbol");
    // 64 rows + header + summary line.
    CHECK(ls.size() == 66);
}

TEST_CASE("lln emits one row per trial") {
    RunResult r = run_cli("lln --potential '" + data_dir() +
                          "/example2.json' --s 1 --n 500 --trials 4 --seed 3");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    int rows = 0;
    for (const auto& line : ls)
        if (!line.empty() && line[0] >= '0' && line[0] <= '9' &&
            split_csv(line).size() == 3)
            ++rows;
    CHECK(rows == 4);
    CHECK(r.output.find("trial,ergodic_average,local_dimension") != std::string::npos);
}

TEST_CASE("invariant walks the alpha grid") {
    RunResult r = run_cli("invariant --potential '" + data_dir() +
                          "/example4.json' --alpha-grid 0:4:1");
    CHECK(r.exit_code == 0);
    auto ls = lines_of(r.output);
    REQUIRE(ls.size() >= 6);
    CHECK(ls[0] == "alpha,feasible,value,entropy,beta1,beta2");
    bool unit = false;
    for (size_t i = 1; i < ls.size(); ++i) {
        auto f = split_csv(ls[i]);
        if (f.size() != 6) continue;
        if (std::fabs(std::stod(f[0]) - 1.0) < 1e-12) {
            unit = true;
            CHECK(f[1] == "yes");
            CHECK(std::stod(f[2]) == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
    CHECK(unit);
}

TEST_CASE("failures exit nonzero with a message") {
    RunResult missing = run_cli("solve --potential /nonexistent.json --s 1");
    CHECK(missing.exit_code != 0);
    CHECK(missing.output.find("error:") != std::string::npos);

    RunResult badgrid = run_cli("pressure --potential '" + data_dir() +
                                "/example1.json' --s-grid 1:0:0.5");
    CHECK(badgrid.exit_code != 0);

    RunResult nosub = run_cli("");
    CHECK(nosub.exit_code != 0);
}
