#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ncs/network.hpp"
#include "ncs/refine.hpp"
#include "ncs/synthesis.hpp"
#include "ncs/vehicle.hpp"

namespace ncs {

struct SimulationConfig {
    std::string policy = "uniform:0";
    std::uint64_t seed = 0;
    std::uint32_t horizon = 94;
    std::size_t runs = 1;
    std::optional<Vec> x0;  // working coordinates; defaults to the first spec initial point
};

struct RunConfig {
    std::filesystem::path source;
    Scenario scenario;
    bool network_from_params = false;  // bounds computed from the network section
    std::uint64_t delay_states = 0;    // state/input counts sizing the messages
    std::uint64_t delay_inputs = 0;
    std::string engine = "lazy";       // lazy | explicit
    GameOptions game;
    BuildOptions build;
    Selection selection;
    SimulationConfig simulation;
    std::filesystem::path spec_path;
    std::filesystem::path output_dir = "out";
};

// YAML run file. Throws ConfigError with line/column and field on any problem.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base = ".");

// Spec file: states (name, point), transitions (pairs of names or indices), initial, regions.
Specification load_spec(const std::filesystem::path& path);
Specification parse_spec(const std::string& text);
void write_spec(std::ostream& os, const Specification& q);

}  // namespace ncs
