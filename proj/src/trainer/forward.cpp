#include "preflab/trainer/forward.hpp"

#include <set>

#include "preflab/ml/regressors.hpp"
#include "preflab/trainer/search.hpp"

namespace preflab::trainer {

ForwardResult forward_selection(const ml::DesignMatrix& train, const ml::DesignMatrix& val,
                                const ScreenedFeatureSet& screened, const ForwardOptions& options) {
  if (options.kind != ml::ModelKind::Ols && options.kind != ml::ModelKind::Ridge)
    throw std::invalid_argument("forward selection supports only ols and ridge");
  ForwardResult out;
  std::set<int> open_clusters;
  for (const auto& [c, _] : screened.clusters) open_clusters.insert(c);

  auto fit = [&](const std::vector<std::string>& cols) {
    const auto Xt = train.select_columns(cols);
    auto m = options.kind == ml::ModelKind::Ols ? ml::fit_ols(Xt) : ml::fit_ridge(Xt, options.ridge_alpha);
    const double loss = mae(val.target(), m.predict(val.select_columns(cols)));
    return std::make_pair(std::move(m), loss);
  };

  for (int round = 0; round < options.n_iter_out && !open_clusters.empty(); ++round) {
    double round_min = out.val_mae;
    std::optional<ForwardStep> best;
    std::optional<ml::FittedModel> best_model;
    for (int c : open_clusters)
      for (const auto& f : screened.clusters.at(c)) {
        auto cols = options.base_columns;
        cols.insert(cols.end(), out.selected.begin(), out.selected.end());
        cols.push_back(f);
        auto [m, loss] = fit(cols);
        if (loss < round_min) {
          round_min = loss;
          best = ForwardStep{f, c, loss};
          best_model = std::move(m);
        }
      }
    if (!best || !(round_min < out.val_mae - options.l_thre)) {
      out.rejected_step = best;
      break;
    }
    out.selected.push_back(best->feature);
    out.val_mae = round_min;
    out.model = std::move(best_model);
    out.steps.push_back(*best);
    open_clusters.erase(best->cluster);
  }
  return out;
}

}  // namespace preflab::trainer
