#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace preflab {

enum class Category { Portrait, Animal, Scene, Building, Plant };
enum class RatingClass { Low, Middle, High };

std::string_view to_string(Category c);
std::string_view to_string(RatingClass c);
std::optional<Category> parse_category(std::string_view s);
std::optional<RatingClass> parse_rating_class(std::string_view s);

/// Raised on any manifest or score-file problem. line() is 1-based, 0 when
/// the problem is not tied to a specific line.
class DataError : public std::runtime_error {
public:
  DataError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct ImageRecord {
  std::string image_id;
  Category category = Category::Portrait;
  RatingClass rating_class = RatingClass::Middle;
  std::string uri;

  bool operator==(const ImageRecord&) const = default;
};

/// One rating on the 1.0..5.0 half-step scale.
struct RatingSample {
  std::string image_id;
  double rating = 3.0;

  bool operator==(const RatingSample&) const = default;
};

/// True when value is one of 1.0, 1.5, ..., 5.0.
bool on_rating_grid(double value);

/// An individual's rated image set. Immutable once built.
class Dataset {
public:
  Dataset() = default;

  /// Throws DataError on duplicate ids or off-grid ratings.
  Dataset(std::vector<ImageRecord> images, std::vector<RatingSample> ratings);

  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }

  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<RatingSample>& ratings() const { return ratings_; }

  bool contains(std::string_view id) const;
  const ImageRecord& image(std::string_view id) const;
  double rating(std::string_view id) const;

  std::vector<std::string> ids() const;
  std::vector<double> ratings_for(const std::vector<std::string>& ids) const;

  bool operator==(const Dataset& other) const {
    return images_ == other.images_ && ratings_ == other.ratings_;
  }

private:
  std::size_t index_of(std::string_view id) const;

  std::vector<ImageRecord> images_;
  std::vector<RatingSample> ratings_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads a line-delimited manifest, one JSON object per line with fields
/// image_id, category, rating_class, rating, uri. Blank lines are skipped.
Dataset ingest_dataset(std::istream& manifest);
Dataset ingest_dataset_file(const std::string& path);

void serialize_dataset(const Dataset& dataset, std::ostream& out);

}  // namespace preflab
