#include <fstream>

#include "doctest.h"
#include "nlsv/runner.hpp"

using namespace nlsv;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("nlsv_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
    auto p = dir / "config.json";
    write_text_file(p, j.dump(2));
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("field file round trip is bit exact") {
    auto dir = temp_dir("fieldio");
    Grid g = make_grid(8, 4.0);
    Field f = random_band_limited(g, 17);
    write_field_file(dir / "f.field", f, 1.25);
    auto [f2, t] = read_field_file(dir / "f.field");
    CHECK(t == 1.25);
    CHECK(f2.grid.n == g.n);
    CHECK(f2.grid.box_length == g.box_length);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(f2.values[i] == f.values[i]);
}

TEST_CASE("potential spec JSON round trip") {
    PotentialSpec s;
    s.kind = PotentialKind::sum;
    PotentialSpec c1;
    c1.kind = PotentialKind::yukawa;
    c1.depth = -2.5;
    c1.decay = 1.5;
    c1.center = {0.5, 0, -1};
    s.children = {c1};
    json j;
    to_json(j, s);
    PotentialSpec back;
    from_json(j, back);
    CHECK(back.kind == PotentialKind::sum);
    REQUIRE(back.children.size() == 1);
    CHECK(back.children[0].depth == -2.5);
    CHECK(back.children[0].center[2] == -1.0);
}

TEST_CASE("kato task on a zero potential writes a zero report") {
    auto dir = temp_dir("kato0");
    json cfg = {{"grid", {{"n", 16}, {"L", 8.0}}},
                {"potential", {{"kind", "bump"}, {"depth", 0.0}, {"width", 1.0}}},
                {"radii", {1.0, 2.0}}};
    auto cfgp = write_config(dir, cfg);
    CHECK(run_cli(cfgp, "kato", dir / "out", 1, false) == 0);
    json rep = json::parse(slurp(dir / "out" / "kato.json"));
    CHECK(rep["global_norm"].get<double>() == 0.0);
    CHECK(rep["negative_part_norm"].get<double>() == 0.0);
    CHECK(rep["weak_l32"].get<double>() == 0.0);
    CHECK(rep["config"]["grid"]["n"].get<int>() == 16);
}

TEST_CASE("decay task rejects times beyond the wrap horizon with exit 2") {
    auto dir = temp_dir("decay_wrap");
    json cfg = {{"grid", {{"n", 16}, {"L", 8.0}}},
                {"potential", {{"kind", "bump"}, {"depth", 0.0}, {"width", 1.0}}},
                {"initial", {{"kind", "gaussian"}, {"amplitude", 1.0}, {"width", 0.8}}},
                {"times", {0.5, 500.0}},
                {"dt", 1e-2}};
    auto cfgp = write_config(dir, cfg);
    CHECK(run_cli(cfgp, "decay", dir / "out", 1, false) == 2);
    json err = json::parse(slurp(dir / "out" / "error.json"));
    CHECK(err["error"]["type"] == "config");
    CHECK(err["error"]["what"].get<std::string>().find("T_wrap") != std::string::npos);
}

TEST_CASE("evolve task writes manifest, slices, summary; trace reads back") {
    auto dir = temp_dir("evolve");
    json cfg = {{"grid", {{"n", 16}, {"L", 16.0}}},
                {"potential", {{"kind", "gaussian_well"}, {"depth", 2.0}, {"width", 1.0}}},
                {"initial", {{"kind", "gaussian"}, {"amplitude", 0.3}, {"width", 1.0}}},
                {"T", 0.1},
                {"dt", 1e-2},
                {"sign", -1},
                {"n_store", 11}};
    auto cfgp = write_config(dir, cfg);
    REQUIRE(run_cli(cfgp, "evolve", dir / "out", 1, false) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "evolve.json"));
    CHECK(std::filesystem::exists(dir / "out" / "evolve_summary.csv"));
    auto tr = read_trace(dir / "out" / "evolve_manifest.json");
    CHECK(tr.times.size() == 11);
    CHECK(tr.fields.size() == 11);
    json rep = json::parse(slurp(dir / "out" / "evolve.json"));
    CHECK(rep["mass_drift"].get<double>() < 1e-10);
}

TEST_CASE("config errors carry exit code 2") {
    auto dir = temp_dir("cfgerr");
    CHECK(run_cli(dir / "missing.json", "kato", dir / "out", 1, false) == 2);

    json bad = {{"grid", {{"n", 7}, {"L", 8.0}}},
                {"potential", {{"kind", "bump"}, {"depth", 0.0}}}};
    CHECK(run_cli(write_config(dir, bad), "kato", dir / "out2", 1, false) == 2);

    json mismatch = {{"task", "evolve"},
                     {"grid", {{"n", 16}, {"L", 8.0}}},
                     {"potential", {{"kind", "bump"}, {"depth", 0.0}}}};
    CHECK(run_cli(write_config(dir, mismatch), "kato", dir / "out3", 1, false) == 2);
}

TEST_CASE("norm-equiv demands a seed; picard artifacts appear") {
    auto dir = temp_dir("seeds");
    json cfg = {{"grid", {{"n", 16}, {"L", 16.0}}},
                {"potential", {{"kind", "gaussian_well"}, {"depth", 2.0}, {"width", 1.0}}},
                {"s", 1.0},
                {"r", 2.0},
                {"ensemble", 3}};
    CHECK(run_cli(write_config(dir, cfg), "norm-equiv", dir / "ne", 1, false) == 2);
    cfg["seed"] = 7;
    CHECK(run_cli(write_config(dir, cfg), "norm-equiv", dir / "ne2", 1, false) == 0);
    json rep = json::parse(slurp(dir / "ne2" / "normequiv.json"));
    CHECK(rep["ratio_min"].get<double>() > 0.0);

    json pc = {{"grid", {{"n", 16}, {"L", 16.0}}},
               {"potential", {{"kind", "gaussian_well"}, {"depth", 2.0}, {"width", 1.0}}},
               {"initial", {{"kind", "gaussian"}, {"amplitude", 0.05}, {"width", 1.0}}},
               {"T", 0.05},
               {"n_t", 9},
               {"sign", -1}};
    REQUIRE(run_cli(write_config(dir, pc), "picard", dir / "pic", 1, false) == 0);
    CHECK(std::filesystem::exists(dir / "pic" / "picard.json"));
    CHECK(std::filesystem::exists(dir / "pic" / "picard_ratios.csv"));
    CHECK(std::filesystem::exists(dir / "pic" / "picard_manifest.json"));
}

}  // TEST_SUITE
