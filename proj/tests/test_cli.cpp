#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = CORM_CLI_PATH;
const std::string kSpecs = CORM_SPEC_DIR;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("corm_cli_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("check: exit codes follow the verdict") {
    TempDir out("check");
    CHECK(run("check --spec " + kSpecs + "/gamma_stable.json --out " +
              out.path.string()) == 0);
    CHECK(fs::exists(out.path / "verdict_report.json"));
    CHECK(fs::exists(out.path / "manifest.json"));
    const std::string report = slurp(out.path / "verdict_report.json");
    CHECK(report.find("\"multivariate\": \"well_posed\"") != std::string::npos);

    CHECK(run("check --spec " + kSpecs + "/illposed_gamma_stable.json --out " +
              out.path.string()) == 1);
    CHECK(run("check --spec " + kSpecs + "/exp_finite_exponential.json --out " +
              out.path.string()) == 0);
}

TEST_CASE("check: malformed and missing spec files exit 64") {
    TempDir out("bad");
    const fs::path bad = out.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run("check --spec " + bad.string() + " --out " + out.path.string()) == 64);
    CHECK(run("check --spec /nonexistent.json --out " + out.path.string()) == 64);
    CHECK(run("bogus-subcommand") == 64);
    CHECK(run("check") == 64); // --spec is required
}

TEST_CASE("tails: refuses ill-posed specs unless forced") {
    TempDir out("tails");
    CHECK(run("tails --spec " + kSpecs + "/illposed_gamma_stable.json --out " +
              out.path.string()) == 1);
    CHECK(run("tails --spec " + kSpecs + "/illposed_gamma_stable.json --force --out " +
              out.path.string()) == 0);
    CHECK(fs::exists(out.path / "tail_table.csv"));
    CHECK(fs::exists(out.path / "index_diagnostic.json"));

    CHECK(run("tails --spec " + kSpecs + "/exp_stable_normalized.json --out " +
              out.path.string()) == 0);
    const std::string diag = slurp(out.path / "index_diagnostic.json");
    CHECK(diag.find("\"index_match\": true") != std::string::npos);

    // degenerate grid is a usage error
    CHECK(run("tails --spec " + kSpecs + "/exp_stable_normalized.json --grid 0:0:0 --out " +
              out.path.string()) == 64);
}

TEST_CASE("verify-derivative: exponential scores only") {
    TempDir out("deriv");
    CHECK(run("verify-derivative --spec " + kSpecs +
              "/exp_stable_normalized.json --d 2,3 --points 4 --out " +
              out.path.string()) == 0);
    CHECK(fs::exists(out.path / "derivative_report.csv"));

    // d = 1 is the identity case and always passes
    CHECK(run("verify-derivative --spec " + kSpecs +
              "/exp_stable_normalized.json --d 1 --points 2 --out " +
              out.path.string()) == 0);

    // zero tolerance cannot pass (documented)
    CHECK(run("verify-derivative --spec " + kSpecs +
              "/exp_stable_normalized.json --d 2 --points 2 --vtol 0 --out " +
              out.path.string()) == 1);

    // non-exponential scores are a contract violation
    CHECK(run("verify-derivative --spec " + kSpecs + "/gamma_stable.json --out " +
              out.path.string()) == 64);
}

TEST_CASE("simulate: deterministic outputs, usage gates") {
    TempDir out_a("sim_a"), out_b("sim_b");
    const std::string spec = kSpecs + "/exp_stable_normalized.json";
    const std::string common =
        "simulate --spec " + spec +
        " --reps 40 --seed 77 --truncation 1e-4 --thresholds 0.5,1";
    CHECK(run(common + " --out " + out_a.path.string()) == 0);
    CHECK(run(common + " --out " + out_b.path.string()) == 0);
    const std::string draw_a = slurp(out_a.path / "draw.csv");
    const std::string draw_b = slurp(out_b.path / "draw.csv");
    REQUIRE(!draw_a.empty());
    CHECK(draw_a == draw_b); // byte-identical
    CHECK(slurp(out_a.path / "sim_report.csv") ==
          slurp(out_b.path / "sim_report.csv"));

    // different seed, different draw
    TempDir out_c("sim_c");
    CHECK(run("simulate --spec " + spec +
              " --reps 40 --seed 78 --truncation 1e-4 --out " +
              out_c.path.string()) == 0);
    CHECK(slurp(out_c.path / "draw.csv") != draw_a);

    CHECK(run("simulate --spec " + spec + " --reps 0 --out " +
              out_a.path.string()) == 64);
    CHECK(run("simulate --spec " + kSpecs +
              "/illposed_gamma_stable.json --reps 10 --out " +
              out_a.path.string()) == 1);
    CHECK(run("simulate --spec " + kSpecs +
              "/illposed_gamma_stable.json --reps 10 --force --truncation 1e-3 --out " +
              out_a.path.string()) == 0);
}
