#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ensdet {

// Engineering cap on the number of manipulation classes in one taxonomy.
inline constexpr std::size_t kMaxManipulations = 64;

// Attribution label. 0 is the real class, 1..K are manipulation methods.
// The negative sentinel marks a fake verdict from a design that cannot
// attribute (binary soft voting).
struct ClassIndex {
  std::int32_t value = 0;

  static constexpr ClassIndex real() noexcept { return {0}; }
  static constexpr ClassIndex unattributed_fake() noexcept { return {-1}; }

  constexpr bool is_real() const noexcept { return value == 0; }
  constexpr bool is_unattributed() const noexcept { return value < 0; }

  friend constexpr auto operator<=>(ClassIndex, ClassIndex) = default;
};

enum class DetectionLabel : std::uint8_t { real = 0, fake = 1 };

// Attribution -> detection label map: real stays real, everything else is fake.
constexpr DetectionLabel to_detection(ClassIndex y) noexcept {
  return y.value == 0 ? DetectionLabel::real : DetectionLabel::fake;
}

constexpr int as_int(DetectionLabel z) noexcept { return static_cast<int>(z); }

// Ordered class names; position 0 is always "real".
class Taxonomy {
 public:
  Taxonomy() = default;
  // Throws Error(validation) unless the names are unique, start with "real",
  // and hold between 1 and kMaxManipulations manipulations.
  Taxonomy(std::string name, std::vector<std::string> class_names);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t class_count() const noexcept { return class_names_.size(); }
  std::size_t manipulation_count() const noexcept { return class_names_.size() - 1; }

  bool contains(ClassIndex y) const noexcept {
    return y.value >= 0 && static_cast<std::size_t>(y.value) < class_names_.size();
  }
  std::optional<ClassIndex> find(std::string_view class_name) const;
  const std::string& name_of(ClassIndex y) const;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

 private:
  std::string name_;
  std::vector<std::string> class_names_;
};

struct FaceRecord {
  std::string sample_id;
  std::string video_id;
  std::uint64_t frame_index = 0;
  std::string identity_id;
  std::optional<ClassIndex> label_y;
  std::optional<DetectionLabel> label_z;

  friend bool operator==(const FaceRecord&, const FaceRecord&) = default;
};

enum class ViolationKind {
  missing_identifier,
  class_out_of_range,
  label_inconsistent,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

// Every invariant a single record breaks against the taxonomy. Empty means ok.
std::vector<Violation> validate_record(const FaceRecord& record, const Taxonomy& taxonomy);

}  // namespace ensdet
