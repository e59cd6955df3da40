#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "preflab/app/config.hpp"
#include "preflab/app/mock_script.hpp"
#include "preflab/app/run_manifest.hpp"
#include "preflab/app/synth.hpp"
#include "preflab/features/applicability.hpp"
#include "preflab/llm/gateway.hpp"

namespace preflab::app {

struct GlobalOptions {
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path artifacts_dir = "artifacts";
  std::optional<std::filesystem::path> mock_llm;
  bool strict_llm = false;
};

/// Fixed artifact locations under the artifacts directory.
struct Layout {
  std::filesystem::path root;
  std::filesystem::path store() const { return root / "store"; }
  std::filesystem::path dataset() const { return store() / "dataset.jsonl"; }
  std::filesystem::path source() const { return store() / "source.json"; }
  std::filesystem::path dl_scores() const { return store() / "dl_scores.jsonl"; }
  std::filesystem::path split() const { return root / "split.json"; }
  std::filesystem::path features() const { return root / "features.json"; }
  std::filesystem::path trace() const { return root / "exploration_trace.json"; }
  std::filesystem::path system() const { return root / "system"; }
  std::filesystem::path predictions() const { return root / "predictions"; }
  std::filesystem::path report() const { return root / "report"; }
  std::filesystem::path interviews() const { return root / "interviews"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path synth() const { return root / "synth"; }
};

/// Seed tags derived from the global seed, one per stage.
enum class StageSeed : std::uint64_t { Split = 11, Explore = 12, Train = 13 };

class Context {
public:
  Context(GlobalOptions options, std::ostream& out, std::ostream& err);

  const AppConfig& config() const { return config_; }
  AppConfig& config() { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stage_seed(StageSeed tag) const;
  const Layout& layout() const { return layout_; }
  const GlobalOptions& options() const { return options_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  /// Throws CommandError(kExitConfigError) with a remediation hint when a
  /// needed role has no configuration or a provider cannot be set up.
  std::unique_ptr<llm::Gateway> gateway(const std::vector<llm::Role>& needed, const std::string& log_name) const;
  /// Image payloads: references under --mock-llm, file contents otherwise.
  features::PayloadSource payloads() const;

  RunManifest manifest() const;
  void save(RunManifest& manifest, StageRecord stage) const;

private:
  GlobalOptions options_;
  AppConfig config_;
  std::uint64_t seed_ = 0;
  Layout layout_;
  std::optional<MockScript> script_;
  std::ostream& out_;
  std::ostream& err_;
};

struct IngestOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> dl_scores;
  bool force = false;
};
int cmd_ingest(Context& ctx, const IngestOptions& o);

struct InterviewOptions {
  std::string participant;
  std::string theme = "all";
  std::string host = "127.0.0.1";
  int port = 8765;
  std::optional<double> timeout_seconds;
  /// Called once the port is bound.
  std::function<void(int port)> on_listening;
};
int cmd_interview(Context& ctx, const InterviewOptions& o);

struct ExploreOptions {
  std::string participant = "default";
  std::optional<int> iterations;
  bool no_interview = false;
};
int cmd_explore(Context& ctx, const ExploreOptions& o);

struct TrainOptions {
  std::optional<std::string> label;
  std::optional<std::string> mode;
  std::optional<std::string> model;
  std::optional<bool> with_dl;
  std::optional<std::filesystem::path> dl_scores;
};
int cmd_train(Context& ctx, const TrainOptions& o);

struct PredictOptions {
  std::string split = "test";  ///< test | val | train | all
  std::vector<std::string> images;
  bool discretize = false;
  std::optional<std::filesystem::path> out;
};
int cmd_predict(Context& ctx, const PredictOptions& o);

struct EvaluateOptions {
  std::optional<std::filesystem::path> truth;
  std::vector<std::filesystem::path> scores;
  std::optional<std::string> baseline;
  std::optional<std::string> alternative;
  std::optional<bool> discretize;
  bool giaa = false;
  std::optional<std::filesystem::path> out;
};
int cmd_evaluate(Context& ctx, const EvaluateOptions& o);

struct SynthCommandOptions {
  std::size_t n_images = 300;
  std::size_t latent_features = 3;
  std::optional<std::filesystem::path> out;
};
int cmd_synth(Context& ctx, const SynthCommandOptions& o);

}  // namespace preflab::app
