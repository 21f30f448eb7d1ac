// CLI integration tests: spawn the real binary, check exit codes, files
// and reproducibility.

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct cli_result {
    int exit_code = -1;
    std::string out;
};

cli_result run_cli(const std::string& args) {
    const std::string tmp = "cli_stdout.tmp";
    const std::string cmd = std::string(EXPSUM_CLI_PATH) + " " + args + " > " + tmp + " 2> cli_stderr.tmp";
    const int raw = std::system(cmd.c_str());
    cli_result r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream is(tmp);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("kloosterman subcommand prints the value") {
    const auto r = run_cli("kloosterman --m 1 --n 1 --c 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("S(1,1;3) = -1") != std::string::npos);
}

TEST_CASE("sphere subcommand writes an 8-row CSV for n = 1") {
    const auto r = run_cli("sphere --n 1 --out cli_sphere1.csv");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp("cli_sphere1.csv");
    CHECK(csv.rfind("x1,x2,x3,x4\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 9);  // header + 8 points
    // manifest sits beside the output
    const std::string manifest = slurp("cli_sphere1.csv.manifest.json");
    CHECK(manifest.find("\"command\": \"sphere\"") != std::string::npos);
    CHECK(manifest.find("\"tool_version\"") != std::string::npos);
    CHECK(manifest.find("\"w0_identifier\"") != std::string::npos);
}

TEST_CASE("argument errors exit with code 2") {
    CHECK(run_cli("sq --q 3 --c 1,0,0,0 --N 5").exit_code == 2);            // N not a multiple of 4
    CHECK(run_cli("sq --q 3 --c 1,0,0,0 --N 6").exit_code == 2);            // even but 4 does not divide
    CHECK(run_cli("linnik --m 1 --n -1 --X 100").exit_code == 2);           // mn < 0
    CHECK(run_cli("cap --n 2 --xi 1,1,0,0").exit_code == 2);                // non-unit xi without --normalize
    CHECK(run_cli("cap --n 2 --xi 1,1,0,0 --normalize").exit_code == 0);
    CHECK(run_cli("kloosterman --m 1 --n 1").exit_code != 0);               // missing required flag
}

TEST_CASE("computational errors exit with code 3") {
    // oscillatory budget blow-up: n = 3 at large lambda and tight tolerance
    CHECK(run_cli("phase --n 3 --order 0 --lambda-grid 120,150,200 --quad-tol 1e-12").exit_code == 3);
}

TEST_CASE("seeded runs are bit-reproducible") {
    const auto r1 = run_cli("cover --n-list 25,49 --samples 64 --seed 9 --out cli_cover_a.csv");
    const auto r2 = run_cli("cover --n-list 25,49 --samples 64 --seed 9 --out cli_cover_b.csv");
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp("cli_cover_a.csv") == slurp("cli_cover_b.csv"));
    const auto r3 = run_cli("cover --n-list 25,49 --samples 64 --seed 10 --out cli_cover_c.csv");
    CHECK(r3.exit_code == 0);
    CHECK(slurp("cli_cover_a.csv") != slurp("cli_cover_c.csv"));
}

TEST_CASE("gauss subcommand reports both evaluations") {
    const auto r = run_cli("gauss --s 1 --t 0 --q 5 --out cli_gauss.csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("brute") != std::string::npos);
    CHECK(r.out.find("closed") != std::string::npos);
    const std::string csv = slurp("cli_gauss.csv");
    CHECK(csv.rfind("s,t,q,method,re,im\n", 0) == 0);
}

TEST_CASE("densities subcommand emits the JSON report schema") {
    const auto r = run_cli("densities --N 4 --prime-cutoff 50 --eps 0.2 --quad-tol 1e-5 --out cli_dens.json");
    CHECK(r.exit_code == 0);
    const std::string j = slurp("cli_dens.json");
    for (const char* key : {"\"N\"", "\"sigma_infinity\"", "\"sigma_p\"", "\"k_star\"", "\"singular_series\"",
                            "\"tail_bound\""})
        CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("compare subcommand runs the pipeline") {
    const auto r = run_cli("compare --r 31 --eps-exponent 0.125 --xi-seed 3 --prime-cutoff 100 --quad-tol 1e-5 "
                           "--out cli_compare.csv");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp("cli_compare.csv");
    CHECK(csv.rfind("r,N,eps,sigma_w,main_term,ratio,budget_ratio\n", 0) == 0);
}

TEST_CASE("from-point directions and rational xi are accepted") {
    CHECK(run_cli("cap --n 4 --from-point 1,1,1,1").exit_code == 0);
    CHECK(run_cli("cap --n 4 --xi 1/2,1/2,1/2,1/2").exit_code == 0);
    CHECK(run_cli("sigma-w --r 5 --from-point 3,4,0,0 --eps 0.35").exit_code == 0);
}
