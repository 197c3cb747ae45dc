#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "solquake/io.hpp"

using namespace solquake;
using testutil::Rng;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliFixture {
    fs::path cli, root, tmp;
    bool available = false;

    CliFixture() {
        const char* cli_env = std::getenv("SOLQUAKE_CLI");
        const char* cfg_env = std::getenv("SOLQUAKE_CONFIG_DIR");
        if (!cli_env || !cfg_env) return;
        cli = cli_env;
        root = fs::path(cfg_env).parent_path();
        tmp = fs::temp_directory_path() / "solquake_cli_test";
        fs::create_directories(tmp);
        available = fs::exists(cli);
    }

    int run(const std::string& args) const {
        std::string cmd = "cd " + root.string() + " && " + cli.string() + " " + args +
                          " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    }
};

} // namespace

TEST_CASE("lamination JSON round trip is bit-exact") {
    Rng rng(71);
    for (int i = 0; i < 20; ++i) {
        MeasuredLamination lam = testutil::random_lamination(rng, 10, 1e-3);
        MeasuredLamination back = lamination_from_json(Json::parse(to_json(lam).dump()));
        REQUIRE(back.size() == lam.size());
        for (std::size_t k = 0; k < lam.size(); ++k) {
            REQUIRE(back.atoms[k].geodesic.p.angle == lam.atoms[k].geodesic.p.angle);
            REQUIRE(back.atoms[k].geodesic.q.angle == lam.atoms[k].geodesic.q.angle);
            REQUIRE(back.atoms[k].weight == lam.atoms[k].weight);
        }
    }
}

TEST_CASE("lamination parser rejects invalid documents with the violation") {
    Json bad = Json::parse(R"({"atoms":[
        {"p_angle":0.0,"q_angle":3.141592653589793,"weight":1.0},
        {"p_angle":1.5707963267948966,"q_angle":4.71238898038469,"weight":1.0}]})");
    REQUIRE_THROWS_WITH(lamination_from_json(bad),
                        Catch::Matchers::ContainsSubstring("cross"));
    REQUIRE_THROWS_AS(lamination_from_json(Json::parse("{}")), ConfigError);
}

TEST_CASE("boundary map JSON round trip is bit-exact") {
    Rng rng(72);
    for (int i = 0; i < 10; ++i) {
        MeasuredLamination lam = testutil::random_lamination(rng, 8, 1e-2);
        PiecewiseMobiusCircleMap h =
            earthquake_boundary(EarthquakeMap(lam, off_fault_base(lam)));
        PiecewiseMobiusCircleMap back = circle_map_from_json(Json::parse(to_json(h).dump()));
        REQUIRE(back.piece_count() == h.piece_count());
        for (std::size_t k = 0; k < h.pieces.size(); ++k) {
            REQUIRE(back.breakpoints[k] == h.breakpoints[k]);
            REQUIRE(back.pieces[k].a == h.pieces[k].a);
            REQUIRE(back.pieces[k].b == h.pieces[k].b);
            REQUIRE(back.pieces[k].c == h.pieces[k].c);
            REQUIRE(back.pieces[k].d == h.pieces[k].d);
        }
        // The recovered measure survives the file format.
        MeasuredLamination r1 = recover_measure(h);
        MeasuredLamination r2 = recover_measure(back);
        REQUIRE(r1.size() == r2.size());
    }
}

TEST_CASE("cover and chain serialization") {
    auto covers = subgroups_of_index_at_most(3);
    for (const auto& c : covers) {
        FiniteCover back = cover_from_json(Json::parse(to_json(c).dump()));
        REQUIRE(back.sigma_a == c.sigma_a);
        REQUIRE(back.sigma_b == c.sigma_b);
    }
    CoreChain chain = CoreChain::canonical(3);
    Json j = to_json(chain);
    REQUIRE(j["depth"] == 3);
    REQUIRE(j["levels"].size() == 3);
    REQUIRE(j["levels"][1].size() == 3);   // the index-2 subgroups
    REQUIRE(j["levels"][2].size() == 13);  // the index-3 subgroups
}

TEST_CASE("leafwise family serialization keys cosets by representative words") {
    PuncturedTorusRep rep;
    auto chain = std::make_shared<const CoreChain>(CoreChain::canonical(2));
    auto space = std::make_shared<const TransversalSpace>(TransversalSpace::build(chain, 2));
    LeafwiseLamination fam = tlc_lift(rep, {{GroupWord::parse("a"), 1.0}}, 1, space);
    Json j = to_json(fam);
    REQUIRE(j["cosets"].size() == 4);
    REQUIRE(j["cosets"].contains("e"));
    for (const auto& [word, doc] : j["cosets"].items())
        REQUIRE(doc["atoms"].size() == fam.at(0).size());
}

TEST_CASE("norm bracket records") {
    Json j = to_json(HolderNormBracket{0.25, 0.5}, 0.5, 128, 7);
    REQUIRE(j["nu"] == 0.5);
    REQUIRE(j["lower"] == 0.25);
    REQUIRE(j["upper"] == 0.5);
    REQUIRE(j["budget"] == 128);
    REQUIRE(j["seed"] == 7);
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "experiment = thurston-ray\n"
        "t_grid = 1, 2, 5\n"
        "boxes = 0.1,0.2,0.3,0.4 ; 1,2,3,4\n"
        "seed = 42\n"
        "tol = 1e-9\n");
    ExperimentConfig cfg = ExperimentConfig::parse(in);
    REQUIRE(cfg.get_string("experiment") == "thurston-ray");
    REQUIRE(cfg.get_grid("t_grid") == std::vector<double>{1.0, 2.0, 5.0});
    REQUIRE(cfg.get_boxes("boxes").size() == 2);
    REQUIRE(cfg.require_seed() == 42);
    REQUIRE(cfg.get_double("tol") == 1e-9);
    REQUIRE(cfg.get_int("missing", 7) == 7);
    REQUIRE_THROWS_AS(cfg.get_string("nope"), ConfigError);

    std::istringstream no_seed("a = 1\n");
    REQUIRE_THROWS_AS(ExperimentConfig::parse(no_seed).require_seed(), ConfigError);

    std::istringstream bad("key value\n");
    REQUIRE_THROWS_AS(ExperimentConfig::parse(bad), ConfigError);
}

TEST_CASE("CLI end-to-end") {
    CliFixture cli;
    if (!cli.available) {
        WARN("SOLQUAKE_CLI not set; skipping CLI end-to-end checks");
        return;
    }

    SECTION("every checked-in sample config runs clean") {
        const std::pair<const char*, const char*> runs[] = {
            {"eval", "eval.cfg"},
            {"recover", "recover.cfg"},
            {"liouville", "liouville.cfg"},
            {"thurston-ray", "thurston_ray.cfg"},
            {"prop31", "prop31.cfg"},
            {"prop32", "prop32.cfg"},
            {"converse", "converse.cfg"},
            {"solenoid-check", "solenoid_ultrametric.cfg"},
            {"solenoid-check", "solenoid_equivariance.cfg"},
            {"solenoid-check", "solenoid_continuity.cfg"},
            {"tlc-density", "tlc_density.cfg"},
            {"cusp-check", "cusp_check.cfg"},
        };
        for (const auto& [sub, cfg] : runs) {
            INFO(sub << " " << cfg);
            fs::path out = cli.tmp / cfg;
            REQUIRE(cli.run(std::string(sub) + " --config configs/" + cfg + " --out " +
                            out.string()) == 0);
            REQUIRE(fs::exists(out / "report.json"));
            REQUIRE(fs::exists(out / "table.csv"));
        }
    }

    SECTION("invalid lamination input fails with the parse status") {
        REQUIRE(cli.run("eval --config configs/bad_crossing.cfg --out " +
                        (cli.tmp / "bad").string()) == 2);
    }

    SECTION("reruns with the same config and seed are byte-identical") {
        fs::path out1 = cli.tmp / "det1", out2 = cli.tmp / "det2";
        REQUIRE(cli.run("thurston-ray --config configs/thurston_ray.cfg --out " +
                        out1.string()) == 0);
        REQUIRE(cli.run("thurston-ray --config configs/thurston_ray.cfg --out " +
                        out2.string()) == 0);
        REQUIRE(read_file(out1 / "table.csv") == read_file(out2 / "table.csv"));
        REQUIRE(read_file(out1 / "report.json") == read_file(out2 / "report.json"));

        fs::path out3 = cli.tmp / "det3";
        REQUIRE(cli.run("converse --config configs/converse.cfg --out " + out3.string()) == 0);
        fs::path out4 = cli.tmp / "det4";
        REQUIRE(cli.run("converse --config configs/converse.cfg --seed 1 --out " +
                        out4.string()) == 0);
        REQUIRE(read_file(out3 / "table.csv") == read_file(out4 / "table.csv"));
    }

    SECTION("describe") {
        REQUIRE(cli.run("describe") == 0);
        REQUIRE(cli.run("describe thurston-ray") == 0);
        REQUIRE(cli.run("describe no-such-experiment") == 2);
    }

    SECTION("missing config key fails with the config status") {
        fs::path broken = cli.tmp / "broken.cfg";
        std::ofstream(broken) << "lamination = configs/data/single_atom.json\n";
        REQUIRE(cli.run("eval --config " + broken.string() + " --out " +
                        (cli.tmp / "broken_out").string()) == 2);
    }
}
