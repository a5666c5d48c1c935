#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bvocsr/error.hpp"
#include "bvocsr/grid.hpp"

namespace bvocsr {

inline constexpr std::size_t kPatchSize = 32;
inline constexpr std::size_t kScale = 2;

/// Which data domain a map or patch comes from.
struct DomainTag {
  enum class Kind : std::uint8_t { Simulated, SimulatedTimeLimited, Observed };

  Kind kind = Kind::Simulated;
  std::uint32_t instrument = 0;  // meaningful for Observed only

  static DomainTag simulated() { return {Kind::Simulated, 0}; }
  static DomainTag simulated_time_limited() { return {Kind::SimulatedTimeLimited, 0}; }
  static DomainTag observed(std::uint32_t instrument) { return {Kind::Observed, instrument}; }

  bool is_observed() const noexcept { return kind == Kind::Observed; }

  /// Code stored in EMG headers: 0 = S, 1 = S_T, 100 + id = O(id).
  std::uint32_t code() const noexcept {
    switch (kind) {
      case Kind::Simulated:
        return 0;
      case Kind::SimulatedTimeLimited:
        return 1;
      case Kind::Observed:
        return 100 + instrument;
    }
    return 0;
  }

  static DomainTag from_code(std::uint32_t code) {
    if (code == 0) return simulated();
    if (code == 1) return simulated_time_limited();
    if (code >= 100) return observed(code - 100);
    fail(ErrorKind::Data, "unknown domain code " + std::to_string(code));
  }

  /// Short label: "S", "ST", "O<id>".
  std::string label() const {
    switch (kind) {
      case Kind::Simulated:
        return "S";
      case Kind::SimulatedTimeLimited:
        return "ST";
      case Kind::Observed:
        return "O" + std::to_string(instrument);
    }
    return "?";
  }

  static DomainTag parse(const std::string& s) {
    if (s == "S") return simulated();
    if (s == "ST") return simulated_time_limited();
    if (s.size() > 1 && s[0] == 'O') {
      try {
        std::size_t used = 0;
        const unsigned long id = std::stoul(s.substr(1), &used);
        if (used == s.size() - 1) return observed(static_cast<std::uint32_t>(id));
      } catch (const std::exception&) {
      }
    }
    fail(ErrorKind::Data, "unknown domain label '" + s + "'");
  }

  bool operator==(const DomainTag&) const = default;
};

/// A non-negative flux grid with its resolution and provenance.
class EmissionMap {
 public:
  EmissionMap(Field values, double resolution_deg, DomainTag domain, std::int64_t time_index,
              std::string species = "isoprene")
      : values_(std::move(values)),
        resolution_deg_(resolution_deg),
        domain_(domain),
        time_index_(time_index),
        species_(std::move(species)) {
    require(values_.rows() >= 1 && values_.cols() >= 1, ErrorKind::Dimension, "emission map must be at least 1x1");
    require(resolution_deg_ > 0.0 && std::isfinite(resolution_deg_), ErrorKind::Data,
            "emission map resolution must be positive");
    for (double v : values_.values())
      require(std::isfinite(v) && v >= 0.0, ErrorKind::Data, "emission map values must be finite and >= 0");
  }

  const Field& values() const noexcept { return values_; }
  std::size_t height() const noexcept { return values_.rows(); }
  std::size_t width() const noexcept { return values_.cols(); }
  double resolution_deg() const noexcept { return resolution_deg_; }
  const DomainTag& domain() const noexcept { return domain_; }
  std::int64_t time_index() const noexcept { return time_index_; }
  const std::string& species() const noexcept { return species_; }

 private:
  Field values_;
  double resolution_deg_;
  DomainTag domain_;
  std::int64_t time_index_;
  std::string species_;
};

/// One HR tile cut out of a map.
struct HrPatch {
  Field hr;
  std::size_t row = 0;
  std::size_t col = 0;
  bool empty = false;  // max value is exactly 0
};

/// Ground-truth HR patch with its downsampled LR input. The unit of training and evaluation.
struct PatchPair {
  Field hr;
  Field lr;
  std::string source_map;
  std::size_t row = 0;
  std::size_t col = 0;
  DomainTag domain;
  std::int64_t time_index = 0;
  bool empty = false;
};

/// Non-overlapping tiling of the top-left floor(H/p)*p x floor(W/p)*p region, row-major order.
inline std::vector<HrPatch> slice_into_patches(const Field& map, std::size_t patch_size) {
  require(patch_size >= 2, ErrorKind::Dimension, "patch size must be >= 2");
  require(map.rows() >= patch_size && map.cols() >= patch_size, ErrorKind::Dimension,
          "map " + std::to_string(map.rows()) + "x" + std::to_string(map.cols()) + " is smaller than patch size " +
              std::to_string(patch_size));
  std::vector<HrPatch> out;
  const std::size_t nr = map.rows() / patch_size;
  const std::size_t nc = map.cols() / patch_size;
  out.reserve(nr * nc);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      HrPatch p;
      p.row = i * patch_size;
      p.col = j * patch_size;
      p.hr = map.crop(p.row, p.col, patch_size, patch_size);
      p.empty = max_value(p.hr) == 0.0;
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::vector<HrPatch> slice_into_patches(const EmissionMap& map, std::size_t patch_size) {
  return slice_into_patches(map.values(), patch_size);
}

/// Inverse of slicing: pastes patches at their origins into a rows x cols grid of zeros.
inline Field reassemble(const std::vector<HrPatch>& patches, std::size_t rows, std::size_t cols) {
  Field out(rows, cols, 0.0);
  for (const auto& p : patches) out.paste(p.hr, p.row, p.col);
  return out;
}

}  // namespace bvocsr
