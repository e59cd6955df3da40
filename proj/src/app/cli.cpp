#include "preflab/app/cli.hpp"

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "preflab/app/commands.hpp"
#include "preflab/app/errors.hpp"
#include "preflab/core/dataset.hpp"
#include "preflab/features/applicability.hpp"
#include "preflab/llm/types.hpp"

namespace preflab::app {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"preflab: interview-driven personalized aesthetics prediction"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string config_path, mock_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "layered JSON config (or a run_manifest.json)");
  auto* seed_opt = app.add_option("--seed", seed, "global seed");
  app.add_option("--artifacts-dir", g.artifacts_dir, "artifact directory")->capture_default_str();
  app.add_option("--mock-llm", mock_path, "mock script; every LLM role is answered offline");
  app.add_flag("--strict-llm", g.strict_llm, "fail on unparseable applicability replies instead of leaving gaps");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a manifest into the dataset store and fix the split");
  c_ingest->add_option("manifest,--manifest", ingest.manifest, "line-delimited manifest")->required();
  c_ingest->add_option("--dl-scores", ingest.dl_scores, "DL predictor-score file to store alongside");
  c_ingest->add_flag("--force", ingest.force, "replace an existing store");

  InterviewOptions interview;
  auto* c_interview = app.add_subcommand("interview", "serve the interview API until the sessions are finalized");
  c_interview->add_option("--participant", interview.participant)->required();
  c_interview->add_option("--theme", interview.theme, "theme name or 'all'")->capture_default_str();
  c_interview->add_option("--host", interview.host)->capture_default_str();
  c_interview->add_option("--port", interview.port, "0 picks a free port")->capture_default_str();
  c_interview->add_option("--timeout", interview.timeout_seconds, "seconds to wait before giving up");

  ExploreOptions explore;
  auto* c_explore = app.add_subcommand("explore", "run feature exploration");
  c_explore->add_option("--participant", explore.participant, "whose interview archives to use")->capture_default_str();
  c_explore->add_option("--iterations", explore.iterations, "override exploration.n_iter_in");
  c_explore->add_flag("--no-interview", explore.no_interview, "ignore interview archives");

  TrainOptions train;
  bool with_dl = false, no_dl = false;
  auto* c_train = app.add_subcommand("train", "train a prediction system on the explored features");
  c_train->add_option("--label", train.label, "system label such as HPS-GBR-withDL");
  c_train->add_option("--mode", train.mode, "hps | fs");
  c_train->add_option("--model", train.model, "ols | ridge | gbr | rfr");
  auto* f_with = c_train->add_flag("--with-dl", with_dl, "use the DL score as an input");
  c_train->add_flag("--no-dl", no_dl, "do not use the DL score")->excludes(f_with);
  c_train->add_option("--dl-scores", train.dl_scores, "DL score file (default: the stored one)");

  PredictOptions predict;
  auto* c_predict = app.add_subcommand("predict", "score images with the trained system");
  c_predict->add_option("--split", predict.split, "test | val | train | all")->capture_default_str();
  c_predict->add_option("--images", predict.images, "explicit image ids");
  c_predict->add_flag("--discretize", predict.discretize, "clip and round to the rating grid");
  c_predict->add_option("--out", predict.out, "output score file");

  EvaluateOptions evaluate;
  bool no_discretize = false;
  auto* c_evaluate = app.add_subcommand("evaluate", "compare predictor-score files against ground truth");
  c_evaluate->add_option("--truth", evaluate.truth, "ground-truth score file (default: stored test ratings)");
  c_evaluate->add_option("--scores", evaluate.scores, "predictor-score files")->take_all();
  c_evaluate->add_option("--baseline", evaluate.baseline, "predictor compared against the others");
  c_evaluate->add_option("--alternative", evaluate.alternative, "two-sided | greater | less");
  c_evaluate->add_flag("--no-discretize", no_discretize, "compare raw scores");
  c_evaluate->add_flag("--giaa", evaluate.giaa, "add the mean-of-others baseline");
  c_evaluate->add_option("--out", evaluate.out, "report directory");

  SynthCommandOptions synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic benchmark fixture");
  c_synth->add_option("--n-images", synth.n_images)->capture_default_str();
  c_synth->add_option("--latent-features", synth.latent_features)->capture_default_str();
  c_synth->add_option("--out", synth.out, "output directory (default: <artifacts>/synth)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (!config_path.empty()) g.config_path = config_path;
  if (!mock_path.empty()) g.mock_llm = mock_path;
  if (*seed_opt) g.seed = seed;
  if (with_dl) train.with_dl = true;
  if (no_dl) train.with_dl = false;
  if (no_discretize) evaluate.discretize = false;

  try {
    Context ctx(g, out, err);
    if (*c_ingest) return cmd_ingest(ctx, ingest);
    if (*c_interview) return cmd_interview(ctx, interview);
    if (*c_explore) return cmd_explore(ctx, explore);
    if (*c_train) return cmd_train(ctx, train);
    if (*c_predict) return cmd_predict(ctx, predict);
    if (*c_evaluate) return cmd_evaluate(ctx, evaluate);
    if (*c_synth) return cmd_synth(ctx, synth);
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const llm::ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace preflab::app
