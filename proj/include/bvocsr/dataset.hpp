#pragma once

// On-disk datasets: EMG map files plus a manifest CSV of patch records, and the synthetic
// three-dataset generator (S at fine and coarse resolution, O at coarse resolution).

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bvocsr/emg.hpp"
#include "bvocsr/manifest.hpp"
#include "bvocsr/resample.hpp"
#include "bvocsr/synthetic.hpp"

namespace bvocsr {

/// Manifest records for every patch of one map file.
inline std::vector<ManifestRecord> records_for_map(const EmissionMap& map, const std::string& file,
                                                   const std::string& id_prefix, DomainTag domain) {
  std::vector<ManifestRecord> out;
  for (const auto& p : slice_into_patches(map, kPatchSize)) {
    ManifestRecord r;
    r.patch_id = id_prefix + "_t" + std::to_string(map.time_index()) + "_r" + std::to_string(p.row) + "_c" +
                 std::to_string(p.col);
    r.file = file;
    r.offset = p.row * map.width() + p.col;
    r.domain = domain;
    r.time_index = map.time_index();
    r.empty = p.empty;
    out.push_back(std::move(r));
  }
  return out;
}

/// HR/LR pair for a 32x32 HR tile.
inline PatchPair make_patch_pair(Field hr, std::string source, std::size_t row, std::size_t col, DomainTag domain,
                                 std::int64_t time_index) {
  PatchPair p;
  p.lr = bicubic_downsample(hr, kScale);
  p.empty = max_value(hr) == 0.0;
  p.hr = std::move(hr);
  p.source_map = std::move(source);
  p.row = row;
  p.col = col;
  p.domain = domain;
  p.time_index = time_index;
  return p;
}

/// Loads every record whose split is in `splits` (all records when empty). Files resolve against base_dir.
inline std::vector<PatchPair> load_patches(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                                           const std::vector<Split>& splits = {}) {
  std::map<std::string, EmissionMap> cache;
  std::vector<PatchPair> out;
  for (const auto& r : manifest.records) {
    if (!splits.empty() && std::find(splits.begin(), splits.end(), r.split) == splits.end()) continue;
    auto it = cache.find(r.file);
    if (it == cache.end()) it = cache.emplace(r.file, read_emg(base_dir / r.file)).first;
    const auto& map = it->second;
    const std::size_t row = r.offset / map.width(), col = r.offset % map.width();
    require(row + kPatchSize <= map.height() && col + kPatchSize <= map.width(), ErrorKind::Data,
            "patch " + r.patch_id + " lies outside " + r.file);
    require(row % kPatchSize == 0 && col % kPatchSize == 0, ErrorKind::Data,
            "patch " + r.patch_id + " origin is not on the 32-cell tiling");
    out.push_back(make_patch_pair(map.values().crop(row, col, kPatchSize, kPatchSize), r.file, row, col, r.domain,
                                  r.time_index));
  }
  return out;
}

inline std::vector<PatchPair> non_empty(std::vector<PatchPair> patches) {
  std::erase_if(patches, [](const PatchPair& p) { return p.empty; });
  return patches;
}

struct SplitConfig {
  RandomFraction fine_fractions;
  ByYear by_year;  // used for the coarse simulated and the observed datasets
};

struct SyntheticScenario {
  FieldConfig field;
  DomainShiftConfig shift;
  std::size_t n_frames = 48;
  std::uint64_t seed = 42;
  SplitConfig splits;
};

struct GeneratedDataset {
  DatasetManifest s_fine;    // simulated, native resolution, random split
  DatasetManifest s_coarse;  // simulated, 2x coarser, time-limited split (S_T)
  DatasetManifest observed;  // observed-like, coarse resolution, split by year
  std::size_t s_frames = 0;
  std::size_t o_frames = 0;
};

inline constexpr const char* kFineManifest = "s_fine.csv";
inline constexpr const char* kCoarseManifest = "s_coarse.csv";
inline constexpr const char* kObservedManifest = "o.csv";

/// Writes EMG files for all three series under out_dir and the three manifests next to them.
/// O frames come from a sliding window of k simulated frames, so there are n_frames - k + 1 of them.
inline GeneratedDataset gen_dataset(const SyntheticScenario& sc, const std::filesystem::path& out_dir) {
  sc.field.validate();
  sc.shift.validate();
  const std::size_t k = sc.shift.aggregation_window;
  require(sc.n_frames >= k, ErrorKind::Config, "n_frames must be >= the aggregation window");
  FieldConfig fc = sc.field;
  fc.seed = sc.seed;
  const SimulatedGenerator gen(fc);
  std::vector<EmissionMap> frames;
  frames.reserve(sc.n_frames);
  DatasetManifest fine, coarse, obs;
  for (std::size_t t = 0; t < sc.n_frames; ++t) {
    // stored values are f32; keep the in-memory series identical to what readers will see
    const EmissionMap raw = gen.frame(static_cast<std::int64_t>(t));
    frames.emplace_back(round_to_f32(raw.values()), raw.resolution_deg(), raw.domain(), raw.time_index());
    const auto& f = frames.back();
    const std::string name = "frame_" + std::to_string(t) + ".emg";
    write_emg(out_dir / "s_fine" / name, f);
    auto recs = records_for_map(f, "s_fine/" + name, "sf", DomainTag::simulated());
    fine.records.insert(fine.records.end(), recs.begin(), recs.end());

    const EmissionMap c(area_average(f.values(), kScale), f.resolution_deg() * kScale, DomainTag::simulated_time_limited(),
                        f.time_index());
    write_emg(out_dir / "s_coarse" / name, c);
    recs = records_for_map(c, "s_coarse/" + name, "sc", DomainTag::simulated_time_limited());
    coarse.records.insert(coarse.records.end(), recs.begin(), recs.end());
  }
  for (std::size_t start = 0; start + k <= sc.n_frames; ++start) {
    const EmissionMap o = derive_observed_frame(std::span<const EmissionMap>(frames).subspan(start, k), sc.shift,
                                                sc.seed);
    const std::string name = "frame_" + std::to_string(o.time_index()) + ".emg";
    write_emg(out_dir / "o" / name, o);
    auto recs = records_for_map(o, "o/" + name, "o", o.domain());
    obs.records.insert(obs.records.end(), recs.begin(), recs.end());
  }
  GeneratedDataset ds;
  ds.s_frames = sc.n_frames;
  ds.o_frames = sc.n_frames - k + 1;
  ds.s_fine = split_random(std::move(fine), sc.splits.fine_fractions, sc.seed);
  ds.s_coarse = split_by_year(std::move(coarse), sc.splits.by_year);
  ds.s_coarse.seed = sc.seed;
  ds.observed = split_by_year(std::move(obs), sc.splits.by_year);
  ds.observed.seed = sc.seed;
  write_manifest(out_dir / kFineManifest, ds.s_fine);
  write_manifest(out_dir / kCoarseManifest, ds.s_coarse);
  write_manifest(out_dir / kObservedManifest, ds.observed);
  return ds;
}

}  // namespace bvocsr
