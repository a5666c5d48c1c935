#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bvocsr/binary_io.hpp"
#include "bvocsr/emission.hpp"
#include "bvocsr/random.hpp"
#include "bvocsr/text.hpp"

namespace bvocsr {

enum class Split : std::uint8_t { Train, Val, Test, Unassigned };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
    case Split::Unassigned:
      return "none";
  }
  return "none";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  if (s == "none") return Split::Unassigned;
  fail(ErrorKind::Data, "unknown split '" + s + "'");
}

struct ManifestRecord {
  std::string patch_id;
  std::string file;         // EMG file, relative to the manifest's directory
  std::uint64_t offset = 0;  // row-major cell index of the patch origin in its map
  Split split = Split::Unassigned;
  DomainTag domain;
  std::int64_t time_index = 0;
  bool empty = false;

  bool operator==(const ManifestRecord&) const = default;
};

struct RandomFraction {
  double train = 0.70;
  double val = 0.20;
  double test = 0.10;
};

/// Assignment by period ordinal = floor(time_index / period).
struct ByYear {
  std::int64_t train_first = 0;
  std::int64_t train_last = 0;
  std::int64_t val = 0;
  std::int64_t test = 0;
  std::int64_t period = 1;
};

using SplitPolicy = std::variant<RandomFraction, ByYear>;

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::uint64_t seed = 0;
  SplitPolicy split_policy = RandomFraction{};

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.split == s ? 1 : 0;
    return n;
  }
};

/// Seeded 70/20/10-style partition. Train and val sizes are round(f*N); test absorbs the remainder.
inline DatasetManifest split_random(DatasetManifest manifest, RandomFraction fractions, std::uint64_t seed) {
  require(!manifest.records.empty(), ErrorKind::Data, "cannot split an empty manifest");
  require(fractions.train > 0 && fractions.val > 0 && fractions.test > 0, ErrorKind::Config,
          "split fractions must be positive");
  require(std::abs(fractions.train + fractions.val + fractions.test - 1.0) <= 1e-9, ErrorKind::Config,
          "split fractions must sum to 1");
  const std::size_t n = manifest.records.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(n)));
  const auto n_val = std::min(n - std::min(n_train, n),
                              static_cast<std::size_t>(std::llround(fractions.val * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x5b117));
  rng.shuffle(order);
  for (std::size_t k = 0; k < n; ++k) {
    auto& rec = manifest.records[order[k]];
    rec.split = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
  }
  manifest.seed = seed;
  manifest.split_policy = fractions;
  return manifest;
}

/// Assigns each record by its period; records outside every range are dropped.
inline DatasetManifest split_by_year(DatasetManifest manifest, const ByYear& policy) {
  require(policy.train_first <= policy.train_last, ErrorKind::Config, "train year range is empty");
  require(policy.period >= 1, ErrorKind::Config, "year period must be >= 1");
  const auto in_train = [&](std::int64_t y) { return y >= policy.train_first && y <= policy.train_last; };
  require(!in_train(policy.val) && !in_train(policy.test) && policy.val != policy.test, ErrorKind::Config,
          "train/val/test year ranges overlap");
  const auto year_of = [&](std::int64_t t) {
    // floor division
    return t >= 0 ? t / policy.period : -((-t + policy.period - 1) / policy.period);
  };
  std::vector<ManifestRecord> kept;
  for (auto& rec : manifest.records) {
    const auto y = year_of(rec.time_index);
    if (in_train(y))
      rec.split = Split::Train;
    else if (y == policy.val)
      rec.split = Split::Val;
    else if (y == policy.test)
      rec.split = Split::Test;
    else
      continue;
    kept.push_back(std::move(rec));
  }
  manifest.records = std::move(kept);
  manifest.split_policy = policy;
  return manifest;
}

inline constexpr const char* kManifestHeader = "patch_id,file,offset,split,domain,time_index,empty";

inline std::string format_manifest(const DatasetManifest& m) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : m.records) {
    require(r.patch_id.find(',') == std::string::npos && r.file.find(',') == std::string::npos, ErrorKind::Data,
            "manifest fields may not contain commas");
    out += r.patch_id + "," + r.file + "," + std::to_string(r.offset) + "," + to_string(r.split) + "," +
           r.domain.label() + "," + std::to_string(r.time_index) + "," + (r.empty ? "1" : "0") + "\n";
  }
  return out;
}

inline DatasetManifest parse_manifest(const std::string& csv, const std::string& origin = "manifest") {
  const auto ls = text::lines(csv);
  if (ls.empty() || text::trim(ls[0]) != kManifestHeader) fail(ErrorKind::Data, origin + ": bad manifest header");
  DatasetManifest m;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (text::trim(ls[i]).empty()) continue;
    const auto where = origin + ":" + std::to_string(i + 1);
    const auto f = text::split(ls[i], ',');
    if (f.size() != 7) fail(ErrorKind::Data, where + ": expected 7 fields");
    ManifestRecord r;
    r.patch_id = f[0];
    r.file = f[1];
    r.offset = text::parse_u64(f[2], where);
    r.split = parse_split(f[3]);
    r.domain = DomainTag::parse(f[4]);
    r.time_index = text::parse_int(f[5], where);
    if (f[6] != "0" && f[6] != "1") fail(ErrorKind::Data, where + ": empty flag must be 0 or 1");
    r.empty = f[6] == "1";
    m.records.push_back(std::move(r));
  }
  return m;
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  io::write_text(path, format_manifest(m));
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(io::read_text(path), path.string());
}

}  // namespace bvocsr
