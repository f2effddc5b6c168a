#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "procml/io.hpp"
#include "procml/rng.hpp"

using namespace procml;

TEST_CASE("landmark text round-trips bit-exactly", "[io]") {
    Rng rng(61);
    std::vector<LandmarkConfig> configs;
    for (int i = 0; i < 4; ++i) {
        Matrix m(5, i % 2 == 0 ? 2 : 3);
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                m(r, c) = rng.normal(0.0, 1.0) * std::pow(10.0, rng.below(8));
        configs.emplace_back(std::move(m));
    }
    // values with no short decimal representation must survive unchanged
    std::ostringstream out;
    write_landmark_stream(out, configs, {"a", "b", "c", "d"});
    std::istringstream in(out.str());
    LandmarkFile file = read_landmark_stream(in);

    REQUIRE(file.ids == std::vector<std::string>{"a", "b", "c", "d"});
    REQUIRE(file.configs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        REQUIRE(file.configs[i].coords() == configs[i].coords());
}

TEST_CASE("landmark header parsing is strict", "[io]") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_landmark_stream(in);
    };
    REQUIRE_THROWS_AS(parse("nonsense 0 p=3 k=2\n0 0\n1 0\n0 1\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=3\n0 0\n1 0\n0 1\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=2 k=2\n0 0\n1 0\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=3 k=4\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=3 k=2\n0 0\n1 0\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=3 k=2\n0 0\n1 0\n0 1 9\n"), ParseError);
    REQUIRE_THROWS_AS(parse("specimen 0 p=3 k=2\n0 0\nx 0\n0 1\n"), ParseError);
    REQUIRE_THROWS_AS(parse(""), ParseError);
    REQUIRE_NOTHROW(parse("specimen s1 p=3 k=2\n0 0\n1 0\n0 1\n"));
}

TEST_CASE("config files parse sections, comments, and spacing", "[io]") {
    std::istringstream in("top = 1\n"
                          "# comment line\n"
                          "\n"
                          "[grid]\n"
                          "  n_values = 20,40\n"
                          "seed=7\n"
                          "[spatial]\n"
                          "sigma = 0.05\n");
    ConfigData data = read_config_stream(in);
    REQUIRE(data.global.size() == 1);
    REQUIRE(data.global[0] == std::pair<std::string, std::string>{"top", "1"});
    REQUIRE(data.sections.size() == 2);
    const KeyValues* grid = data.find_section("grid");
    REQUIRE(grid != nullptr);
    REQUIRE(grid->size() == 2);
    REQUIRE((*grid)[0].first == "n_values");
    REQUIRE((*grid)[0].second == "20,40");
    REQUIRE((*grid)[1].second == "7");
    REQUIRE(data.find_section("spatial") != nullptr);
    REQUIRE(data.find_section("loo") == nullptr);
}

TEST_CASE("config parse errors name the line", "[io]") {
    std::istringstream bad1("key value\n");
    REQUIRE_THROWS_AS(read_config_stream(bad1), ParseError);
    std::istringstream bad2("[section\nk = v\n");
    REQUIRE_THROWS_AS(read_config_stream(bad2), ParseError);
    try {
        std::istringstream bad3("ok = 1\nbroken\n");
        read_config_stream(bad3, "conf");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("conf:2") != std::string::npos);
    }
}

TEST_CASE("config write and read are inverse", "[io]") {
    ConfigData data;
    data.global = {{"subcommand", "grid"}};
    data.sections = {{"grid", {{"seed", "42"}, {"k", "2"}}},
                     {"spatial", {{"sigma", "0.05"}}}};
    const std::string path = "io_config_roundtrip.txt";
    write_config_file(path, data);
    ConfigData back = read_config_file(path);
    REQUIRE(back.global == data.global);
    REQUIRE(back.sections == data.sections);
    std::remove(path.c_str());
}

TEST_CASE("double formatting restores the exact value", "[io]") {
    Rng rng(62);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal(0.0, 1.0) * std::pow(10.0, (int)rng.below(20) - 10);
        const std::string s = format_double(v);
        REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    }
}
