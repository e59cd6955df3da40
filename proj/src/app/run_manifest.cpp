#include "preflab/app/run_manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "preflab/app/errors.hpp"
#include "preflab/llm/payload.hpp"

namespace preflab::app {

using nlohmann::json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::map<std::string, std::string> RunManifest::artifacts() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stages)
    for (const auto& [k, v] : s.artifacts) out[k] = v;
  return out;
}

const StageRecord* RunManifest::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

void RunManifest::record(StageRecord stage) {
  for (auto& s : stages)
    if (s.name == stage.name) {
      s = std::move(stage);
      return;
    }
  stages.push_back(std::move(stage));
}

json RunManifest::to_json() const {
  json st = json::array();
  for (const auto& s : stages)
    st.push_back({{"name", s.name},
                  {"seed", s.seed},
                  {"started_at", s.started_at},
                  {"finished_at", s.finished_at},
                  {"artifacts", s.artifacts},
                  {"details", s.details}});
  return {{"format", kRunManifestFormat},
          {"run_id", run_id},
          {"seed", seed},
          {"config", config},
          {"stages", st},
          {"artifacts", artifacts()}};
}

RunManifest RunManifest::from_json(const json& j) {
  if (j.value("format", "") != kRunManifestFormat) throw data_error("not a run manifest");
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config = j.at("config");
  for (const auto& s : j.at("stages"))
    m.stages.push_back({s.at("name").get<std::string>(), s.at("seed").get<std::uint64_t>(),
                        s.at("started_at").get<std::string>(), s.at("finished_at").get<std::string>(),
                        s.at("artifacts").get<std::map<std::string, std::string>>(), s.value("details", json::object())});
  return m;
}

RunManifest RunManifest::open(const std::filesystem::path& dir, const json& config, std::uint64_t seed) {
  RunManifest m;
  const auto path = dir / kRunManifestFile;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    try {
      m = from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw data_error(path.string() + ": " + e.what());
    }
  }
  m.config = config;
  m.seed = seed;
  if (m.run_id.empty())
    m.run_id = "run-" + llm::sha256_hex(fmt::format("{}|{}", seed, config.dump())).substr(0, 16);
  return m;
}

void RunManifest::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto tmp = dir / (std::string(kRunManifestFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << to_json().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, dir / kRunManifestFile);
}

}  // namespace preflab::app
