#include "preflab/core/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace preflab {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames{"portrait", "animal", "scene", "building",
                                                         "plant"};
constexpr std::array<std::string_view, 3> kRatingClassNames{"Low", "Middle", "High"};

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(RatingClass c) { return kRatingClassNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  return std::nullopt;
}

std::optional<RatingClass> parse_rating_class(std::string_view s) {
  for (std::size_t i = 0; i < kRatingClassNames.size(); ++i)
    if (kRatingClassNames[i] == s) return static_cast<RatingClass>(i);
  return std::nullopt;
}

DataError::DataError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

bool on_rating_grid(double value) {
  if (!std::isfinite(value) || value < 1.0 || value > 5.0) return false;
  const double twice = value * 2.0;
  return twice == std::floor(twice);
}

Dataset::Dataset(std::vector<ImageRecord> images, std::vector<RatingSample> ratings)
    : images_(std::move(images)), ratings_(std::move(ratings)) {
  if (images_.size() != ratings_.size())
    throw DataError("image and rating counts differ");
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i].image_id != ratings_[i].image_id)
      throw DataError("rating order does not match image order at index " + std::to_string(i));
    if (!on_rating_grid(ratings_[i].rating))
      throw DataError("rating not on 0.5 grid for image '" + images_[i].image_id + "'");
    if (!index_.emplace(images_[i].image_id, i).second)
      throw DataError("duplicate image_id '" + images_[i].image_id + "'");
  }
}

std::size_t Dataset::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw DataError("unknown image_id '" + std::string(id) + "'");
  return it->second;
}

bool Dataset::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }
const ImageRecord& Dataset::image(std::string_view id) const { return images_[index_of(id)]; }
double Dataset::rating(std::string_view id) const { return ratings_[index_of(id)].rating; }

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(images_.size());
  for (const auto& im : images_) out.push_back(im.image_id);
  return out;
}

std::vector<double> Dataset::ratings_for(const std::vector<std::string>& ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(rating(id));
  return out;
}

Dataset ingest_dataset(std::istream& manifest) {
  std::vector<ImageRecord> images;
  std::vector<RatingSample> ratings;
  std::unordered_map<std::string, std::size_t> seen;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(manifest, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw DataError("record must be an object", line_no);

    ImageRecord rec;
    rec.image_id = require_string(obj, "image_id", line_no);
    if (rec.image_id.empty()) throw DataError("empty image_id", line_no);
    const auto cat = require_string(obj, "category", line_no);
    auto parsed_cat = parse_category(cat);
    if (!parsed_cat) throw DataError("unknown category '" + cat + "'", line_no);
    rec.category = *parsed_cat;
    const auto cls = require_string(obj, "rating_class", line_no);
    auto parsed_cls = parse_rating_class(cls);
    if (!parsed_cls) throw DataError("unknown rating_class '" + cls + "'", line_no);
    rec.rating_class = *parsed_cls;
    rec.uri = require_string(obj, "uri", line_no);

    auto r = obj.find("rating");
    if (r == obj.end() || !r->is_number()) throw DataError("field 'rating' must be a number", line_no);
    const double rating = r->get<double>();
    if (!on_rating_grid(rating)) throw DataError("rating not on 0.5 grid", line_no);

    if (!seen.emplace(rec.image_id, line_no).second)
      throw DataError("duplicate image_id '" + rec.image_id + "'", line_no);
    ratings.push_back({rec.image_id, rating});
    images.push_back(std::move(rec));
  }
  return Dataset(std::move(images), std::move(ratings));
}

Dataset ingest_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  return ingest_dataset(in);
}

void serialize_dataset(const Dataset& dataset, std::ostream& out) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& im = dataset.images()[i];
    json obj = {{"image_id", im.image_id},
                {"category", to_string(im.category)},
                {"rating_class", to_string(im.rating_class)},
                {"rating", dataset.ratings()[i].rating},
                {"uri", im.uri}};
    out << obj.dump() << '\n';
  }
}

}  // namespace preflab
