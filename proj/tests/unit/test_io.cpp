#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mgpi/io.hpp"
#include "mgpi/rng.hpp"
#include "mgpi/sim.hpp"

using namespace mgpi;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "mgpi_io_tests";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("layout csv load") {
    const fs::path path = temp_dir() / "ok.csv";
    write_file(path,
               "agent_id,x,y,gaze_x,gaze_y,group_id\n"
               "0,0.0,0.0,1,0,0\n"
               "1,3.5,1.25,3,4,1\n");
    const Layout layout = load_layout(path);
    REQUIRE(layout.size() == 2);
    CHECK(layout.agents[1].pose.gaze.x == doctest::Approx(0.6));
    CHECK(layout.agents[1].pose.gaze.y == doctest::Approx(0.8));
    CHECK(layout.agents[1].group_id == 1);
}

TEST_CASE("layout csv rejects zero gaze with line number") {
    const fs::path path = temp_dir() / "zero_gaze.csv";
    write_file(path,
               "agent_id,x,y,gaze_x,gaze_y,group_id\n"
               "0,0,0,1,0,0\n"
               "1,1,1,0,0,0\n");
    try {
        load_layout(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("layout csv rejects duplicates and malformed rows") {
    const fs::path dup = temp_dir() / "dup.csv";
    write_file(dup,
               "agent_id,x,y,gaze_x,gaze_y,group_id\n"
               "2,0,0,1,0,0\n"
               "2,1,1,0,1,0\n");
    CHECK_THROWS_AS(load_layout(dup), ParseError);

    const fs::path bad = temp_dir() / "bad.csv";
    write_file(bad,
               "agent_id,x,y,gaze_x,gaze_y,group_id\n"
               "0,zero,0,1,0,0\n");
    CHECK_THROWS_AS(load_layout(bad), ParseError);
}

TEST_CASE("layout csv round trip preserves values") {
    Rng rng(4);
    sim::LayoutGenParams gen;
    const Layout layout = sim::generate_layout(gen, rng);
    const fs::path path = temp_dir() / "roundtrip.csv";
    save_layout(layout, path);
    const Layout loaded = load_layout(path);
    REQUIRE(loaded.size() == layout.size());
    for (int i = 0; i < layout.size(); ++i) {
        CHECK(loaded.agents[static_cast<std::size_t>(i)].id ==
              layout.agents[static_cast<std::size_t>(i)].id);
        CHECK(loaded.agents[static_cast<std::size_t>(i)].pose.position.x ==
              layout.agents[static_cast<std::size_t>(i)].pose.position.x);
        CHECK(loaded.agents[static_cast<std::size_t>(i)].pose.gaze.y ==
              doctest::Approx(layout.agents[static_cast<std::size_t>(i)].pose.gaze.y).epsilon(1e-15));
    }
}

TEST_CASE("demonstration jsonl round trip") {
    Rng rng(5);
    sim::LayoutGenParams gen;
    const Layout layout = sim::generate_layout(gen, rng);
    const Demonstration demo = sim::rollout(layout, Scenario::Dynamic, 40, sim::RuleParams{}, 99);

    const fs::path path = temp_dir() / "demo.jsonl";
    save_demonstration(demo, path);
    const Demonstration loaded = load_demonstration(path);
    CHECK(loaded.scenario == demo.scenario);
    CHECK(loaded.seed == demo.seed);
    REQUIRE(loaded.length() == demo.length());
    for (int t = 0; t < demo.length(); ++t) {
        const Frame& a = demo.frames[static_cast<std::size_t>(t)];
        const Frame& b = loaded.frames[static_cast<std::size_t>(t)];
        REQUIRE(a.size() == b.size());
        for (int i = 0; i < a.size(); ++i) {
            const FrameAgent& fa = a.agents[static_cast<std::size_t>(i)];
            const FrameAgent& fb = b.agents[static_cast<std::size_t>(i)];
            CHECK(fa.id == fb.id);
            CHECK(fa.pose.position.x == fb.pose.position.x);  // exact: shortest round-trip reals
            CHECK(fa.pose.gaze.y == fb.pose.gaze.y);
            CHECK(fa.action == fb.action);
            CHECK(fa.group_id == fb.group_id);
        }
    }
    // saving the loaded copy reproduces the bytes
    const fs::path path2 = temp_dir() / "demo2.jsonl";
    save_demonstration(loaded, path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("demonstration loader rejects bad input") {
    const fs::path path = temp_dir() / "broken.jsonl";
    write_file(path, "{\"format_version\":1,\"scenario\":\"static\",\"seed\":1,\"agent_ids\":[0,1]}\n"
                     "not json\n");
    CHECK_THROWS_AS(load_demonstration(path), ParseError);
}

TEST_CASE("rule params kv round trip") {
    sim::RuleParams rules;
    rules.p_distract = 0.125;
    rules.speak_duration_max = 42;
    sim::LayoutGenParams gen;
    gen.jitter = 3.25;
    const std::string text = sim::params_to_kv(rules, gen);

    sim::RuleParams rules2;
    sim::LayoutGenParams gen2;
    sim::params_from_kv(text, rules2, gen2);
    CHECK(rules2.p_distract == 0.125);
    CHECK(rules2.speak_duration_max == 42);
    CHECK(gen2.jitter == 3.25);
    CHECK_THROWS(sim::params_from_kv("unknown_key=1\n", rules2, gen2));
}
