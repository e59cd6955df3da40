#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflab/core/dataset.hpp"
#include "preflab/features/feature.hpp"
#include "preflab/llm/gateway.hpp"

namespace preflab::features {

/// Feature x image applicability on {0, 0.25, 0.5, 0.75, 1}. Cells can be
/// flagged missing; they read as 0.0.
class ApplicabilityMatrix {
public:
  /// Throws std::invalid_argument for values off the 5-point grid.
  void set(const std::string& feature, const std::string& image_id, double value);
  void set_missing(const std::string& feature, const std::string& image_id);

  bool has(const std::string& feature, const std::string& image_id) const;
  bool missing(const std::string& feature, const std::string& image_id) const;
  /// Throws std::out_of_range for cells never evaluated.
  double value(const std::string& feature, const std::string& image_id) const;

  /// Values in `ids` order, missing cells as 0.0.
  std::vector<double> row(const std::string& feature, const std::vector<std::string>& ids) const;
  std::vector<bool> missing_mask(const std::string& feature, const std::vector<std::string>& ids) const;

  bool has_feature(const std::string& feature) const { return cells_.count(feature) > 0; }
  std::vector<std::string> features() const;
  std::size_t missing_count() const;
  std::size_t size() const;

  /// Keeps only the listed features.
  ApplicabilityMatrix restricted_to(const std::vector<std::string>& features) const;

  nlohmann::json to_json() const;
  static ApplicabilityMatrix from_json(const nlohmann::json& j);

  bool operator==(const ApplicabilityMatrix&) const = default;

private:
  struct Cell {
    double value = 0.0;
    bool missing = false;
    bool operator==(const Cell&) const = default;
  };
  std::map<std::string, std::map<std::string, Cell>> cells_;
};

bool on_applicability_grid(double v);

/// First integer token in 0..4 in the reply ("score: 3/4" -> 3). Tokens
/// that are negative, fractional or out of range are skipped.
std::optional<int> parse_applicability_reply(const std::string& reply);

class ApplicabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using PayloadSource = std::function<std::vector<llm::ImagePayload>(const ImageRecord&)>;

struct EvaluatorOptions {
  bool strict = false;
  std::size_t workers = 4;
};

struct EvaluationStats {
  std::size_t calls = 0;
  std::size_t missing = 0;
  std::size_t reparsed = 0;  ///< unparseable first replies re-asked on the fallback model
};

/// Scores (feature, image) pairs through the applicability_evaluator role.
class ApplicabilityEvaluator {
public:
  ApplicabilityEvaluator(llm::Gateway& gateway, PayloadSource payloads, EvaluatorOptions options = {});

  /// Grid value, or nullopt for a missing cell in non-strict mode. Strict
  /// mode throws ApplicabilityError (unparseable after the fallback) or
  /// llm::LlmError (gateway exhausted).
  std::optional<double> evaluate(const Feature& feature, const ImageRecord& image);

  /// Fills every (feature, image) cell not already present. Calls fan out
  /// across worker threads; the matrix is updated once, in input order.
  void evaluate_all(const std::vector<Feature>& features, const std::vector<const ImageRecord*>& images,
                    ApplicabilityMatrix& matrix);

  EvaluationStats stats() const;
  const PayloadSource& payloads() const { return payloads_; }

private:
  llm::Gateway& gateway_;
  PayloadSource payloads_;
  EvaluatorOptions options_;
  mutable std::mutex mu_;
  EvaluationStats stats_;
};

llm::ChatRequest applicability_request(const Feature& feature, const ImageRecord& image,
                                       std::vector<llm::ImagePayload> payloads);

}  // namespace preflab::features
