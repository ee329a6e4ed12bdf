#include "ensdet/labels.hpp"

#include <unordered_set>

#include "ensdet/error.hpp"

namespace ensdet {

Taxonomy::Taxonomy(std::string name, std::vector<std::string> class_names)
    : name_(std::move(name)), class_names_(std::move(class_names)) {
  if (name_.empty()) throw Error(ErrorKind::validation, "taxonomy name is empty");
  if (class_names_.size() < 2)
    throw Error(ErrorKind::validation, "taxonomy needs the real class and at least one manipulation");
  if (class_names_.size() - 1 > kMaxManipulations)
    throw Error(ErrorKind::validation, "taxonomy has " + std::to_string(class_names_.size() - 1) +
                                           " manipulations; the limit is " +
                                           std::to_string(kMaxManipulations));
  if (class_names_.front() != "real")
    throw Error(ErrorKind::validation, "taxonomy class 0 must be named \"real\", got \"" +
                                           class_names_.front() + "\"");
  std::unordered_set<std::string_view> seen;
  for (const auto& c : class_names_) {
    if (c.empty()) throw Error(ErrorKind::validation, "taxonomy has an empty class name");
    if (!seen.insert(c).second)
      throw Error(ErrorKind::validation, "duplicate class name \"" + c + "\" in taxonomy");
  }
}

std::optional<ClassIndex> Taxonomy::find(std::string_view class_name) const {
  for (std::size_t i = 0; i < class_names_.size(); ++i) {
    if (class_names_[i] == class_name) return ClassIndex{static_cast<std::int32_t>(i)};
  }
  return std::nullopt;
}

const std::string& Taxonomy::name_of(ClassIndex y) const {
  if (!contains(y)) throw_invalid("class index " + std::to_string(y.value) + " is outside the taxonomy");
  return class_names_[static_cast<std::size_t>(y.value)];
}

std::vector<Violation> validate_record(const FaceRecord& record, const Taxonomy& taxonomy) {
  std::vector<Violation> out;
  if (record.sample_id.empty() || record.video_id.empty() || record.identity_id.empty())
    out.push_back({ViolationKind::missing_identifier, "empty sample, video or identity id"});
  if (record.label_y && !taxonomy.contains(*record.label_y)) {
    out.push_back({ViolationKind::class_out_of_range,
                   "class out of range: " + std::to_string(record.label_y->value) + " not in [0, " +
                       std::to_string(taxonomy.manipulation_count()) + "]"});
  }
  if (record.label_y && record.label_z && to_detection(*record.label_y) != *record.label_z) {
    out.push_back({ViolationKind::label_inconsistent,
                   "z≠g(y): detection label " + std::to_string(as_int(*record.label_z)) +
                       " contradicts attribution label " + std::to_string(record.label_y->value)});
  }
  return out;
}

}  // namespace ensdet
