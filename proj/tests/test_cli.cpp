#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gqnet/io.hpp"
#include "gqnet/sim.hpp"

using namespace gqnet;
namespace fs = std::filesystem;

#ifndef GQNET_CLI_PATH
#error "GQNET_CLI_PATH must point at the built command-line binary"
#endif

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gqnet_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd =
        std::string(GQNET_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// reproducible 3-group dataset (p = 2) whose responses are bounded away from
// zero, so the first group drives the sign and the fit is well conditioned
void write_demo_dataset(const fs::path& p, int n = 60, unsigned seed = 4) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> ux(-0.9, 0.9);
    std::normal_distribution<double> norm;
    std::ofstream os(p);
    os << "#groups: 3 2\n";
    os.precision(17);
    for (int i = 0; i < n; ++i) {
        double x[6];
        for (double& v : x) v = ux(gen);
        const double sgn = (x[0] + 0.2 * norm(gen) >= 0.0) ? 1.0 : -1.0;
        const double y = sgn * (1.5 + std::abs(norm(gen)));
        os << y;
        for (double v : x) os << "," << v;
        os << "\n";
    }
}

}  // namespace

TEST_CASE("read_dataset header forms") {
    TempDir tmp;
    const auto path = tmp.path / "d.csv";

    SUBCASE("groups header") {
        write_demo_dataset(path);
        auto d = read_dataset(path.string());
        CHECK(d.design.n == 60);
        CHECK(d.design.g == 3);
        CHECK(d.design.p == 2);
        CHECK(d.y.size() == 60);
    }
    SUBCASE("groupmap header") {
        std::ofstream(path) << "#groupmap: 1 1 2 2\n"
                               "1.0 0.1 0.2 0.3 0.4\n"
                               "2.0 0.5 0.6 0.7 0.8\n";
        auto d = read_dataset(path.string());
        CHECK(d.design.g == 2);
        CHECK(d.design.p == 2);
        CHECK(d.design.values(1, 3) == doctest::Approx(0.8));
    }
    SUBCASE("headerless fallback: one column per group") {
        std::ofstream(path) << "1.0 2.0 3.0\n4.0 5.0 6.0\n";
        auto d = read_dataset(path.string());
        CHECK(d.design.g == 2);
        CHECK(d.design.p == 1);
    }
    SUBCASE("groups override") {
        std::ofstream(path) << "1.0 1 2 3 4\n2.0 5 6 7 8\n";
        auto d = read_dataset(path.string(), 2);
        CHECK(d.design.g == 2);
        CHECK(d.design.p == 2);
    }
    SUBCASE("ragged row rejected with a line number") {
        std::ofstream(path) << "1.0 2.0 3.0\n4.0 5.0\n";
        try {
            read_dataset(path.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell rejected") {
        std::ofstream(path) << "1.0 abc\n";
        CHECK_THROWS_AS(read_dataset(path.string()), ParseError);
    }
    SUBCASE("indivisible override rejected") {
        std::ofstream(path) << "1.0 1 2 3\n";
        CHECK_THROWS_AS(read_dataset(path.string(), 2), ParseError);
    }
}

TEST_CASE("coefficient file round trip preserves every bit") {
    TempDir tmp;
    const auto path = tmp.path / "coef.txt";
    std::mt19937 gen(8);
    std::normal_distribution<double> norm;
    Eigen::VectorXd flat(6);
    for (int k = 0; k < 6; ++k) flat[k] = norm(gen) * std::pow(10.0, int(gen() % 7) - 3);
    auto beta = GroupedCoefficients::from_flat(3, 2, flat);
    {
        std::ofstream os(path);
        write_coefficients(os, beta);
    }
    auto back = read_coefficients(path.string());
    CHECK(back.g == 3);
    CHECK(back.p == 2);
    CHECK(back.flat == beta.flat);  // 17 significant digits round-trip doubles
}

TEST_CASE("read_scenario") {
    TempDir tmp;
    const auto path = tmp.path / "scen.txt";

    SUBCASE("preset beta and all keys") {
        std::ofstream(path) << "n = 50\ng = 5\np = 2\nerror = cauchy\ntau = 0.3\n"
                               "reps = 7\nseed = 99\nbeta = p2\nsn = 1\n";
        auto sc = read_scenario(path.string());
        CHECK(sc.n == 50);
        CHECK(sc.g == 5);
        CHECK(sc.error_law.kind == ErrorLaw::Kind::cauchy);
        CHECK(sc.tau == doctest::Approx(0.3));
        CHECK(sc.replications == 7);
        CHECK(sc.base_seed == 99);
        CHECK(sc.true_beta.group(0).isApprox(Eigen::Vector2d(0.5, 1.0)));
        REQUIRE(sc.sn_override.has_value());
        CHECK(*sc.sn_override == 1.0);
    }
    SUBCASE("explicit beta list") {
        std::ofstream(path) << "n = 40\ng = 2\np = 1\nbeta = 1.5,-0.5\n";
        auto sc = read_scenario(path.string());
        CHECK(sc.true_beta.flat.isApprox(Eigen::Vector2d(1.5, -0.5)));
    }
    SUBCASE("unknown key names the offender") {
        std::ofstream(path) << "n = 40\nbogus = 1\n";
        try {
            read_scenario(path.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("bogus") != std::string::npos);
        }
    }
}

TEST_CASE("cli fit round trip and kkt verdicts") {
    TempDir tmp;
    const auto data = tmp.path / "d.csv";
    const auto coef1 = tmp.path / "c1.txt";
    const auto coef2 = tmp.path / "c2.txt";
    const auto sink = tmp.path / "out.txt";
    write_demo_dataset(data);

    const std::string fitargs = "fit " + data.string() + " --lambda1 0.5 --lambda2 15";
    CHECK(run_cli(fitargs + " --out " + coef1.string(), sink) == 0);
    CHECK(run_cli(fitargs + " --out " + coef2.string(), sink) == 0);
    CHECK(slurp(coef1) == slurp(coef2));  // byte-identical reruns

    auto fitted = read_coefficients(coef1.string());
    CHECK(fitted.g == 3);
    // the sign-driving group survives a mild penalty
    CHECK(fitted.group_norm(0) > 0.1);

    SUBCASE("kkt accepts the fit and rejects a perturbed copy") {
        CHECK(run_cli("kkt " + data.string() + " " + coef1.string() +
                          " --lambda1 0.5 --lambda2 15",
                      sink) == 0);
        CHECK(slurp(sink).find("PASS") != std::string::npos);

        auto bad = fitted;
        bad.flat[0] += 0.5;
        {
            std::ofstream os(coef2);
            write_coefficients(os, bad);
        }
        CHECK(run_cli("kkt " + data.string() + " " + coef2.string() +
                          " --lambda1 0.5 --lambda2 15",
                      sink) == 3);
        CHECK(slurp(sink).find("FAIL") != std::string::npos);
    }
    SUBCASE("lambda2 = 0 is an input error (exit 1)") {
        CHECK(run_cli("fit " + data.string() + " --lambda2 0", sink) == 1);
    }
    SUBCASE("missing dataset is an input error") {
        CHECK(run_cli("fit " + (tmp.path / "nope.csv").string(), sink) == 1);
    }
}

TEST_CASE("cli tau auto matches estimate_tau") {
    TempDir tmp;
    const auto data = tmp.path / "d.csv";
    const auto sink = tmp.path / "out.txt";
    // y has 2 of 5 standardized values below zero -> tau = 0.4
    std::ofstream(data) << "#groups: 1 1\n-3,1\n-2,1\n4,1\n5,1\n6,1\n";
    Eigen::VectorXd y(5);
    y << -3, -2, 4, 5, 6;
    CHECK(estimate_tau(y) == doctest::Approx(0.4));
    CHECK(run_cli("fit " + data.string() + " --tau auto", sink) == 0);
    CHECK(slurp(sink).find("tau 0.4") != std::string::npos);
}

TEST_CASE("cli simulate: serial and parallel agree, seed env override works") {
    TempDir tmp;
    const auto scen = tmp.path / "scen.txt";
    std::ofstream(scen) << "n = 50\ng = 5\np = 1\nbeta = p1\nreps = 3\nseed = 5\n";
    const auto sink = tmp.path / "out.txt";
    const auto dir1 = tmp.path / "run1";
    const auto dir2 = tmp.path / "run2";

    CHECK(run_cli("simulate " + scen.string() + " --jobs 1 --out " + dir1.string(), sink) == 0);
    CHECK(run_cli("simulate " + scen.string() + " --jobs 2 --out " + dir2.string(), sink) == 0);
    // runtime columns differ between runs; compare the deterministic summary
    auto strip_runtime = [](std::string s) {
        const auto pos = s.find("mean_runtime_seconds");
        return s.substr(0, pos);
    };
    CHECK(strip_runtime(slurp(dir1 / "summary.txt")) ==
          strip_runtime(slurp(dir2 / "summary.txt")));

    SUBCASE("GQNET_SEED changes the stream") {
        const auto dir3 = tmp.path / "run3";
        const std::string cmd = std::string("GQNET_SEED=123 ") + GQNET_CLI_PATH + " simulate " +
                                scen.string() + " --jobs 1 --out " + dir3.string() + " > " +
                                sink.string() + " 2>/dev/null";
        CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        CHECK(slurp(dir3 / "summary.txt").find("seed 123") != std::string::npos);
    }
    SUBCASE("bad scenario key is an input error") {
        std::ofstream(scen) << "n = 50\nwat = 9\n";
        CHECK(run_cli("simulate " + scen.string() + " --out " + (tmp.path / "x").string(),
                      sink) == 1);
    }
}
