#include "preflab/trainer/search.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "preflab/ml/regressors.hpp"

namespace preflab::trainer {

double mae(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("mae: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("mae of an empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += std::abs(y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

SearchResult hyperparameter_search(const ml::DesignMatrix& train, const ml::DesignMatrix& val, ml::ModelKind kind,
                                   const std::vector<ml::Hyperparameters>& grid, std::uint64_t seed,
                                   std::size_t workers) {
  if (grid.empty()) throw std::invalid_argument("hyperparameter grid is empty");
  if (train.cols() == 0)
    throw DegenerateInputError("no predictors to search over; use the constant or DL-only fallback");
  std::vector<std::optional<ml::FittedModel>> models(grid.size());
  std::vector<double> losses(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= grid.size()) return;
      try {
        auto m = ml::fit_model(kind, train, grid[i], seed);
        losses[i] = mae(val.target(), m.predict(val));
        models[i] = std::move(m);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(std::max<std::size_t>(workers, 1), grid.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::size_t best = 0;
  double best_loss = INFINITY;
  SearchResult out{*models[0], 0.0, 0, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.evaluations.push_back({grid[i], losses[i]});
    if (losses[i] < best_loss) {
      best_loss = losses[i];
      best = i;
    }
  }
  out.model = *models[best];
  out.val_mae = best_loss;
  out.best_index = best;
  return out;
}

}  // namespace preflab::trainer
