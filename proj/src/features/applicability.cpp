#include "preflab/features/applicability.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <thread>

namespace preflab::features {

bool on_applicability_grid(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
  const double k = v * 4.0;
  return k == std::round(k);
}

void ApplicabilityMatrix::set(const std::string& feature, const std::string& image_id, double value) {
  if (!on_applicability_grid(value))
    throw std::invalid_argument("applicability " + std::to_string(value) + " for '" + feature + "' is off the grid");
  cells_[feature][image_id] = Cell{value, false};
}

void ApplicabilityMatrix::set_missing(const std::string& feature, const std::string& image_id) {
  cells_[feature][image_id] = Cell{0.0, true};
}

bool ApplicabilityMatrix::has(const std::string& feature, const std::string& image_id) const {
  auto it = cells_.find(feature);
  return it != cells_.end() && it->second.count(image_id);
}

bool ApplicabilityMatrix::missing(const std::string& feature, const std::string& image_id) const {
  return cells_.at(feature).at(image_id).missing;
}

double ApplicabilityMatrix::value(const std::string& feature, const std::string& image_id) const {
  auto it = cells_.find(feature);
  if (it == cells_.end()) throw std::out_of_range("no applicability for feature '" + feature + "'");
  auto c = it->second.find(image_id);
  if (c == it->second.end())
    throw std::out_of_range("no applicability for feature '" + feature + "' on image '" + image_id + "'");
  return c->second.value;
}

std::vector<double> ApplicabilityMatrix::row(const std::string& feature, const std::vector<std::string>& ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(value(feature, id));
  return out;
}

std::vector<bool> ApplicabilityMatrix::missing_mask(const std::string& feature,
                                                    const std::vector<std::string>& ids) const {
  std::vector<bool> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    value(feature, id);  // range check
    out.push_back(missing(feature, id));
  }
  return out;
}

std::vector<std::string> ApplicabilityMatrix::features() const {
  std::vector<std::string> out;
  for (const auto& [f, _] : cells_) out.push_back(f);
  return out;
}

std::size_t ApplicabilityMatrix::missing_count() const {
  std::size_t n = 0;
  for (const auto& [_, row] : cells_)
    for (const auto& [__, c] : row) n += c.missing;
  return n;
}

std::size_t ApplicabilityMatrix::size() const {
  std::size_t n = 0;
  for (const auto& [_, row] : cells_) n += row.size();
  return n;
}

ApplicabilityMatrix ApplicabilityMatrix::restricted_to(const std::vector<std::string>& features) const {
  ApplicabilityMatrix out;
  for (const auto& f : features) {
    auto it = cells_.find(f);
    if (it != cells_.end()) out.cells_[f] = it->second;
  }
  return out;
}

nlohmann::json ApplicabilityMatrix::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [f, row] : cells_) {
    auto& out = j[f] = nlohmann::json::object();
    for (const auto& [id, c] : row) out[id] = c.missing ? nlohmann::json() : nlohmann::json(c.value);
  }
  return j;
}

ApplicabilityMatrix ApplicabilityMatrix::from_json(const nlohmann::json& j) {
  ApplicabilityMatrix m;
  for (const auto& [f, row] : j.items())
    for (const auto& [id, v] : row.items()) {
      if (v.is_null()) m.set_missing(f, id);
      else m.set(f, id, v.get<double>());
    }
  return m;
}

std::optional<int> parse_applicability_reply(const std::string& reply) {
  const std::size_t n = reply.size();
  std::size_t i = 0;
  while (i < n) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
    const bool negative = start > 0 && reply[start - 1] == '-';
    const bool fractional = (i + 1 < n && reply[i] == '.' && std::isdigit(static_cast<unsigned char>(reply[i + 1]))) ||
                            (start > 0 && reply[start - 1] == '.');
    if (negative || fractional) {
      // skip the fractional tail as part of the same token
      if (i < n && reply[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
      }
      continue;
    }
    if (i - start == 1 && reply[start] <= '4') return reply[start] - '0';
  }
  return std::nullopt;
}

llm::ChatRequest applicability_request(const Feature& feature, const ImageRecord& image,
                                       std::vector<llm::ImagePayload> payloads) {
  llm::ChatRequest req;
  req.role = llm::Role::ApplicabilityEvaluator;
  req.system_prompt =
      "You judge whether a described property holds for an image. Answer with a single integer: "
      "0 (does not apply at all), 1, 2, 3, or 4 (applies fully).";
  req.messages.push_back({"user", "Feature name: " + feature.name + "\nFeature description: " + feature.description +
                                      "\nImage ID: " + image.image_id +
                                      "\nHow well does the feature apply to this image? Reply with one integer from 0 to 4."});
  req.images = std::move(payloads);
  return req;
}

ApplicabilityEvaluator::ApplicabilityEvaluator(llm::Gateway& gateway, PayloadSource payloads, EvaluatorOptions options)
    : gateway_(gateway), payloads_(std::move(payloads)), options_(options) {
  if (options_.workers == 0) options_.workers = 1;
}

std::optional<double> ApplicabilityEvaluator::evaluate(const Feature& feature, const ImageRecord& image) {
  auto req = applicability_request(feature, image, payloads_ ? payloads_(image) : std::vector<llm::ImagePayload>{});
  auto count = [&](std::size_t EvaluationStats::*field) {
    std::lock_guard lk(mu_);
    ++(stats_.*field);
  };
  std::optional<int> k;
  try {
    count(&EvaluationStats::calls);
    k = parse_applicability_reply(gateway_.complete_with_fallback(req).text);
    if (!k) {
      count(&EvaluationStats::reparsed);
      count(&EvaluationStats::calls);
      auto again = req;
      again.role = llm::Role::RetryFallback;
      k = parse_applicability_reply(gateway_.complete_with_fallback(again).text);
    }
  } catch (const llm::ConfigError&) {
    throw;
  } catch (const llm::LlmError&) {
    if (options_.strict) throw;
  }
  if (k) return *k / 4.0;
  if (options_.strict)
    throw ApplicabilityError("unparseable applicability reply for feature '" + feature.name + "' on image '" +
                             image.image_id + "'");
  count(&EvaluationStats::missing);
  return std::nullopt;
}

void ApplicabilityEvaluator::evaluate_all(const std::vector<Feature>& features,
                                          const std::vector<const ImageRecord*>& images, ApplicabilityMatrix& matrix) {
  struct Task {
    const Feature* feature;
    const ImageRecord* image;
    std::optional<double> result;
  };
  std::vector<Task> tasks;
  for (const auto& f : features)
    for (const auto* img : images)
      if (!matrix.has(f.name, img->image_id)) tasks.push_back({&f, img, std::nullopt});
  if (tasks.empty()) return;

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      {
        std::lock_guard lk(err_mu);
        if (error) return;
      }
      const auto i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        tasks[i].result = evaluate(*tasks[i].feature, *tasks[i].image);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const auto n_workers = std::min(options_.workers, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (const auto& t : tasks) {
    if (t.result) matrix.set(t.feature->name, t.image->image_id, *t.result);
    else matrix.set_missing(t.feature->name, t.image->image_id);
  }
}

EvaluationStats ApplicabilityEvaluator::stats() const {
  std::lock_guard lk(mu_);
  return stats_;
}

}  // namespace preflab::features
