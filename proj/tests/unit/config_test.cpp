#include <doctest.h>

#include "wavescat/config.hpp"

#include <filesystem>

using namespace wavescat;

#ifndef WAVESCAT_SOURCE_DIR
#define WAVESCAT_SOURCE_DIR "."
#endif

namespace {

const char* kMinimal = R"(
name = "tiny"
[geometry]
type = "cylinders"
radius = 0.3
centers = [[0.0, 0.0]]
[domain]
half_width = 1.0
dx = 0.25
[frequency]
omega_max = 4.0
n_base = 20
[initial.f]
kind = "gaussian"
decay = 3.0
)";

} // namespace

TEST_CASE("minimal config keeps defaults")
{
    ExperimentConfig c = parse_config(kMinimal);
    CHECK(c.name == "tiny");
    CHECK(c.geometry == GeometryType::Cylinders);
    REQUIRE(c.centers.size() == 1);
    CHECK(c.radius == 0.3);
    CHECK(c.n_base == 20);
    CHECK(c.f.kind == IcKind::Gaussian);
    CHECK(c.g.kind == IcKind::Zero);
    CHECK(c.n_inc == ExperimentConfig{}.n_inc);
    CHECK(c.c == 1.0);
}

TEST_CASE("serialization round trip")
{
    for (const auto& name : preset_names()) {
        ExperimentConfig p = preset(name);
        INFO(name);
        CHECK(parse_config(serialize_config(p)) == p);
    }
    ExperimentConfig c = parse_config(kMinimal);
    c.times = {0.0, 0.1, 1.0 / 3.0};
    c.mesh_path = "meshes/a b.txt";
    CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("unknown keys and bad values are rejected")
{
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "\n[physics]\nspeed = 2.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "\n[extra]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("name = \"x\"\n[geometry]\ntype = \"sphere\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("name = \"x\"\n[domain\n"), ConfigError);

    ExperimentConfig c = parse_config(kMinimal);
    c.dx = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config(kMinimal);
    c.n_inc = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    try {
        parse_config(std::string(kMinimal) + "\n[physics]\nspeed = 2.0\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("physics.speed") != std::string::npos);
    }
}

TEST_CASE("config hash ignores paths only")
{
    ExperimentConfig a = preset("cyl_gaussian");
    ExperimentConfig b = a;
    b.out_dir = "elsewhere";
    b.cache_dir = "/tmp/other";
    CHECK(config_hash(a) == config_hash(b));
    b.n_base += 1;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(preset("srr_gaussian")) != config_hash(preset("srr_dipole")));
}

TEST_CASE("shipped preset files match the built-in presets")
{
    const std::filesystem::path dir = std::filesystem::path(WAVESCAT_SOURCE_DIR) / "presets";
    for (const auto& name : preset_names()) {
        INFO(name);
        CHECK(load_config((dir / (name + ".toml")).string()) == preset(name));
    }
    CHECK_THROWS_AS(preset("srr_unknown"), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "missing.toml").string()), ConfigError);
}
