#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "nlsv/potential.hpp"
#include "nlsv/trace.hpp"

namespace nlsv {

using json = nlohmann::json;

void to_json(json& j, const PotentialSpec& spec);
void from_json(const json& j, PotentialSpec& spec);

/// Deterministic shortest round-trip formatting used by every CSV/JSON artifact.
std::string format_double(double v);

/// Binary slice file: header n, L, time as 8-byte little-endian floats, then
/// n^3 (re, im) pairs, index order (ix*n + iy)*n + iz.
void write_field_file(const std::filesystem::path& path, const Field& f, double time);
std::pair<Field, double> read_field_file(const std::filesystem::path& path);

/// Trace persistence: JSON manifest + one binary file per slice + CSV summary
/// with columns (t, mass, energy, h1).
void write_trace(const std::filesystem::path& dir, const std::string& stem,
                 const EvolutionTrace& trace, const json& config_echo);
EvolutionTrace read_trace(const std::filesystem::path& manifest_path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace nlsv
