#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "lpso/cantor.hpp"
#include "lpso/periodic.hpp"
#include "lpso/sampler.hpp"

namespace lpso {

using json = nlohmann::ordered_json;

json to_json(const PeriodicSampler& f);
PeriodicSampler sampler_from_json(const json& j);

json to_json(const BandSpectrum& s);  // array of [a, b] pairs
std::string to_csv(const BandSpectrum& s);

// {schedule: [n_1..n_K], level: k, values: [...]}. Level 0 means no schedule.
struct LevelSampler {
  std::vector<std::int64_t> schedule;
  std::size_t level = 0;
  PeriodicSampler sampler;
};
json to_json(const LevelSampler& s);
LevelSampler level_sampler_from_json(const json& j);

// Parse a JSON file; syntax errors become ParseError with the line number.
json read_json_file(const std::filesystem::path& path);
// Writes text atomically enough for our purposes; throws std::runtime_error on IO failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string dump(const json& j);

}  // namespace lpso
