#include "lpso/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lpso/error.hpp"

namespace lpso {

json to_json(const PeriodicSampler& f) {
  return json(std::vector<double>(f.values().begin(), f.values().end()));
}

PeriodicSampler sampler_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("sampler values must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError("sampler values must be numbers");
    v.push_back(x.get<double>());
  }
  try {
    return PeriodicSampler(std::move(v));
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

json to_json(const BandSpectrum& s) {
  json a = json::array();
  for (const auto& b : s.bands) a.push_back({b.left, b.right});
  return a;
}

std::string to_csv(const BandSpectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "band_index,left,right\n";
  for (std::size_t z = 0; z < s.bands.size(); ++z)
    os << z << ',' << s.bands[z].left << ',' << s.bands[z].right << '\n';
  return os.str();
}

json to_json(const LevelSampler& s) {
  json j;
  j["schedule"] = s.schedule;
  j["level"] = s.level;
  j["values"] = to_json(s.sampler);
  return j;
}

LevelSampler level_sampler_from_json(const json& j) {
  if (!j.is_object() || !j.contains("values")) throw ParseError("sampler document needs a values array");
  LevelSampler s;
  s.sampler = sampler_from_json(j.at("values"));
  if (j.contains("schedule")) {
    for (const auto& x : j.at("schedule")) {
      if (!x.is_number_integer()) throw ParseError("schedule entries must be integers");
      s.schedule.push_back(x.get<std::int64_t>());
    }
  }
  if (j.contains("level")) {
    if (!j.at("level").is_number_unsigned()) throw ParseError("level must be a non-negative integer");
    s.level = j.at("level").get<std::size_t>();
  }
  if (!s.schedule.empty()) {
    try {
      GroupSchedule gs(s.schedule);
      if (s.level == 0 || s.level > gs.depth()) throw ParseError("level out of range");
      if (gs.index(s.level) % static_cast<std::int64_t>(s.sampler.period()) != 0)
        throw ParseError("sampler period must divide the level index");
    } catch (const DomainError& e) {
      throw ParseError(e.what());
    }
  }
  return s;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto > 0 ? upto - 1 : 0), '\n'));
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

}  // namespace lpso
