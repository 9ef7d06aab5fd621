#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "wavefuse/cli.hpp"
#include "wavefuse/evaluation.hpp"
#include "wavefuse/image_io.hpp"

using namespace wavefuse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TmpDir {
    fs::path path;
    TmpDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("wavefuse_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

std::string make_scene_png(const TmpDir& dir, const std::string& name, int index = 0,
                           int size = 32) {
    std::string p = dir.str(name);
    save_image(make_test_scene(index, size, size, 7), p);
    return p;
}

} // namespace

TEST_CASE("version prints name and number") {
    CliResult r = cli({"version"});
    CHECK(r.code == 0);
    CHECK(r.out == "wavefuse 1.0.0\n");
    CHECK(r.err.empty());
}

TEST_CASE("missing subcommand and unknown flags are usage errors") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"transmogrify"}).code == 1);
    CHECK(cli({"enhance"}).code == 1); // required input missing
    CHECK(cli({"version", "--frobnicate"}).code == 1);
}

TEST_CASE("bad option values are usage errors") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    CliResult r = cli({"enhance", in, dir.str("out.png"), "--algo", "bogus"});
    CHECK(r.code == 1);
    CHECK(r.err.find("algo") != std::string::npos);
    CHECK(cli({"enhance", in, dir.str("o.png"), "--gammas", "1,oops"}).code == 1);
    CHECK(cli({"enhance", in, dir.str("o.png"), "--basis", "db7"}).code == 1);
}

TEST_CASE("missing input file maps to the I/O exit code") {
    TmpDir dir;
    CliResult r = cli({"enhance", dir.str("absent.png"), dir.str("out.png")});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("invalid numeric configuration maps to exit code 3") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    CliResult r = cli({"enhance", in, dir.str("out.png"), "--scales", "40"});
    CHECK(r.code == 3);
    CHECK(r.err.find("scales") != std::string::npos);
}

TEST_CASE("enhance writes the image, a manifest, and the path to stdout") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    std::string out_path = dir.str("enhanced.png");
    CliResult r = cli({"enhance", in, out_path});
    REQUIRE(r.code == 0);
    CHECK(r.out == out_path + "\n");
    CHECK(fs::exists(out_path));

    json m = json::parse(slurp(out_path + ".manifest.json"));
    CHECK(m["tool"] == "wavefuse");
    CHECK(m["version"] == kVersion);
    CHECK(m["input"] == in);
    CHECK(m["config"]["algo"] == "pa2");
    REQUIRE(m["passes"].is_array());
    CHECK(!m["passes"].empty());
    CHECK(m["metrics"]["input"].contains("entropy"));
    CHECK(m["metrics"]["output"].contains("dark_channel_mean"));
}

TEST_CASE("--out wins over the positional output") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    std::string pos = dir.str("pos.png"), flag = dir.str("flag.png");
    CliResult r = cli({"enhance", in, pos, "--out", flag});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(flag));
    CHECK(!fs::exists(pos));
}

TEST_CASE("config file is honored and flags override it") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    std::string cfg = dir.str("cfg.json");
    spit(cfg, R"({"algo":"dcp","scales":2,"gammas":[1.0]})");

    SUBCASE("file alone") {
        std::string out_path = dir.str("a.png");
        REQUIRE(cli({"enhance", in, out_path, "--config", cfg}).code == 0);
        json m = json::parse(slurp(out_path + ".manifest.json"));
        CHECK(m["config"]["algo"] == "dcp");
        CHECK(m["config"]["scales"] == 2);
    }
    SUBCASE("flag overrides file") {
        std::string out_path = dir.str("b.png");
        REQUIRE(cli({"enhance", in, out_path, "--config", cfg, "--algo", "pa1"}).code == 0);
        json m = json::parse(slurp(out_path + ".manifest.json"));
        CHECK(m["config"]["algo"] == "pa1");
        CHECK(m["config"]["scales"] == 2);
    }
    SUBCASE("unknown key") {
        spit(cfg, R"({"algoz":1})");
        CliResult r = cli({"enhance", in, dir.str("c.png"), "--config", cfg});
        CHECK(r.code == 1);
        CHECK(r.err.find("algoz") != std::string::npos);
    }
    SUBCASE("gammas must be an array") {
        spit(cfg, R"({"gammas":"1"})");
        CHECK(cli({"enhance", in, dir.str("d.png"), "--config", cfg}).code == 1);
    }
    SUBCASE("malformed JSON") {
        spit(cfg, "{algo:");
        CHECK(cli({"enhance", in, dir.str("e.png"), "--config", cfg}).code == 1);
    }
    SUBCASE("missing config file") {
        CHECK(cli({"enhance", in, dir.str("f.png"), "--config", dir.str("nope.json")}).code ==
              2);
    }
}

TEST_CASE("metrics emits the documented CSV") {
    TmpDir dir;
    std::string a = make_scene_png(dir, "a.png", 0);
    std::string b = make_scene_png(dir, "b.png", 1);

    SUBCASE("stdout, no reference") {
        CliResult r = cli({"metrics", a, b});
        REQUIRE(r.code == 0);
        std::istringstream lines(r.out);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "# wavefuse metrics v1");
        std::getline(lines, line);
        CHECK(line == metric_csv_header());
        std::getline(lines, line);
        CHECK(line.find(a + ",ok,") == 0);
        CHECK(line.back() == ','); // empty rmse column
        std::getline(lines, line);
        CHECK(line.find(b + ",ok,") == 0);
    }
    SUBCASE("file output with identical reference") {
        std::string csv_path = dir.str("m.csv");
        REQUIRE(cli({"metrics", a, "--reference", a, "--out", csv_path}).code == 0);
        std::string csv = slurp(csv_path);
        CHECK(csv.find(",ok,") != std::string::npos);
        // rmse against itself is exactly zero
        CHECK(csv.rfind(",0\n") == csv.size() - 3);
    }
    SUBCASE("reference shape mismatch") {
        std::string small = make_scene_png(dir, "small.png", 0, 16);
        CHECK(cli({"metrics", a, "--reference", small}).code == 1);
    }
    SUBCASE("reference count mismatch") {
        CHECK(cli({"metrics", a, b, "--reference", a, "--reference", a, "--reference", b})
                  .code == 1);
    }
}

TEST_CASE("synth generates a reproducible corpus") {
    TmpDir dir;
    SUBCASE("t=1 haze is byte-identical to the clean image") {
        REQUIRE(cli({"synth", "--out", dir.str("s"), "--count", "1", "--size", "32x32",
                     "--t", "1"})
                    .code == 0);
        CHECK(slurp(dir.str("s/scene0.png")) == slurp(dir.str("s/scene0_haze_t1.png")));
    }
    SUBCASE("file set and manifest") {
        CliResult r = cli({"synth", "--out", dir.str("c"), "--count", "2", "--size", "32x32",
                           "--t", "0.4,0.8", "--cast", "green"});
        REQUIRE(r.code == 0);
        for (const char* name : {"scene0.png", "scene0_haze_t0.4.png", "scene0_haze_t0.8.png",
                                 "scene0_cast.png", "scene1.png", "scene1_cast.png"})
            CHECK(fs::exists(dir.path / "c" / name));
        json m = json::parse(slurp(dir.str("c/synth_manifest.json")));
        CHECK(m["entries"].size() == 6); // 2 scenes x (2 haze + 1 cast)
        int casts = 0;
        for (const auto& e : m["entries"])
            if (e["type"] == "cast")
                ++casts;
        CHECK(casts == 2);
    }
    SUBCASE("no-haze skips transmissions") {
        REQUIRE(cli({"synth", "--out", dir.str("n"), "--count", "1", "--size", "32x32",
                     "--no-haze", "--cast", "0.5,0.9,0.7"})
                    .code == 0);
        CHECK(fs::exists(dir.path / "n" / "scene0_cast.png"));
        CHECK(!fs::exists(dir.path / "n" / "scene0_haze_t0.6.png"));
    }
    SUBCASE("degrading an explicit input keeps its stem") {
        std::string in = make_scene_png(dir, "photo.png");
        REQUIRE(cli({"synth", in, "--out", dir.str("p"), "--t", "0.5"}).code == 0);
        CHECK(fs::exists(dir.path / "p" / "photo_haze_t0.5.png"));
    }
    SUBCASE("bad size and bad cast are usage errors") {
        CHECK(cli({"synth", "--out", dir.str("x"), "--size", "banana"}).code == 1);
        CHECK(cli({"synth", "--out", dir.str("x"), "--cast", "0.5,0.9"}).code == 1);
    }
}

TEST_CASE("sweep reports per-value rows and flags failures") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png");
    SUBCASE("an out-of-range value fails its row but the sweep continues") {
        CliResult r = cli({"sweep", in, "--param", "scales", "--values", "1,40", "--out",
                           dir.str("sw")});
        CHECK(r.code == 3);
        std::string csv = slurp(dir.str("sw/sweep_scales.csv"));
        CHECK(csv.find("scales,1,") != std::string::npos);
        CHECK(csv.find("scales,40,") != std::string::npos);
        CHECK(csv.find("failed:invalid") != std::string::npos);
        CHECK(fs::exists(dir.path / "sw" / "in_scales_1.png"));
        CHECK(!fs::exists(dir.path / "sw" / "in_scales_40.png"));
    }
    SUBCASE("good values succeed") {
        CliResult r = cli({"sweep", in, "--param", "frac-gain", "--values", "0,0.3", "--out",
                           dir.str("g")});
        CHECK(r.code == 0);
        std::string csv = slurp(dir.str("g/sweep_frac-gain.csv"));
        CHECK(csv.find("failed") == std::string::npos);
    }
    SUBCASE("unknown parameter") {
        CHECK(cli({"sweep", in, "--param", "zeta", "--values", "1", "--out", dir.str("z")})
                  .code == 1);
    }
    SUBCASE("non-integer value for an integer parameter") {
        CHECK(cli({"sweep", in, "--param", "scales", "--values", "1.5", "--out", dir.str("q")})
                  .code == 1);
    }
}

TEST_CASE("batch processes many images deterministically") {
    TmpDir dir;
    std::vector<std::string> ins = {make_scene_png(dir, "s0.png", 0),
                                    make_scene_png(dir, "s1.png", 1),
                                    make_scene_png(dir, "s2.png", 2)};
    SUBCASE("jobs 1 and jobs 2 give byte-identical results") {
        REQUIRE(cli({"batch", ins[0], ins[1], ins[2], "--out", dir.str("j1"), "--jobs", "1"})
                    .code == 0);
        REQUIRE(cli({"batch", ins[0], ins[1], ins[2], "--out", dir.str("j2"), "--jobs", "2"})
                    .code == 0);
        CHECK(slurp(dir.str("j1/batch_metrics.csv")) == slurp(dir.str("j2/batch_metrics.csv")));
        for (const char* name : {"s0_pa2.png", "s1_pa2.png", "s2_pa2.png"})
            CHECK(slurp((dir.path / "j1" / name).string()) ==
                  slurp((dir.path / "j2" / name).string()));
        json m = json::parse(slurp(dir.str("j1/batch_manifest.json")));
        CHECK(m["entries"].size() == 3);
        CHECK(m["config"]["algo"] == "pa2");
    }
    SUBCASE("a missing input yields a failed row and the I/O exit code") {
        CliResult r = cli({"batch", ins[0], dir.str("ghost.png"), "--out", dir.str("f")});
        CHECK(r.code == 2);
        std::string csv = slurp(dir.str("f/batch_metrics.csv"));
        CHECK(csv.find("failed:io") != std::string::npos);
        CHECK(csv.find("s0_pa2.png,ok,") != std::string::npos);
    }
    SUBCASE("a numerically invalid config fails with exit code 3") {
        CliResult r =
            cli({"batch", ins[0], "--out", dir.str("x"), "--algo", "pa2", "--scales", "40"});
        CHECK(r.code == 3);
    }
}

TEST_CASE("repeated enhance runs are byte-identical") {
    TmpDir dir;
    std::string in = make_scene_png(dir, "in.png", 3);
    std::string o1 = dir.str("r1.png"), o2 = dir.str("r2.png");
    REQUIRE(cli({"enhance", in, o1, "--algo", "pa1"}).code == 0);
    REQUIRE(cli({"enhance", in, o2, "--algo", "pa1"}).code == 0);
    CHECK(slurp(o1) == slurp(o2));
}
