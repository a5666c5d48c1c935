#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>

#include "bvocsr/dataset.hpp"
#include "support.hpp"

using namespace bvocsr;

namespace {

DatasetManifest manifest_of(std::size_t n, std::int64_t t0 = 0) {
  DatasetManifest m;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRecord r;
    r.patch_id = "p" + std::to_string(i);
    r.file = "f.emg";
    r.time_index = t0 + static_cast<std::int64_t>(i);
    m.records.push_back(r);
  }
  return m;
}

std::array<std::size_t, 3> sizes(const DatasetManifest& m) {
  return {m.count(Split::Train), m.count(Split::Val), m.count(Split::Test)};
}

// |DFT|^2 by direct summation.
Field power_spectrum(const Field& f) {
  const std::size_t h = f.rows(), w = f.cols();
  std::vector<std::complex<double>> rows(h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0;
      for (std::size_t x = 0; x < w; ++x) acc += f(y, x) * std::polar(1.0, -2 * std::numbers::pi * kx * x / w);
      rows[y * w + kx] = acc;
    }
  Field p(h, w);
  for (std::size_t ky = 0; ky < h; ++ky)
    for (std::size_t kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0;
      for (std::size_t y = 0; y < h; ++y) acc += rows[y * w + kx] * std::polar(1.0, -2 * std::numbers::pi * ky * y / h);
      p(ky, kx) = std::norm(acc);
    }
  return p;
}

double radius(std::size_t ky, std::size_t kx, std::size_t n) {
  const double fy = ky <= n / 2 ? double(ky) : double(ky) - double(n);
  const double fx = kx <= n / 2 ? double(kx) : double(kx) - double(n);
  return std::hypot(fy, fx);
}

double high_frequency_energy(const Field& f) {
  const auto p = power_spectrum(f);
  double e = 0;
  for (std::size_t ky = 0; ky < f.rows(); ++ky)
    for (std::size_t kx = 0; kx < f.cols(); ++kx)
      if (radius(ky, kx, f.rows()) > f.rows() / 4.0) e += p(ky, kx);
  return e;
}

FieldConfig small_field() {
  FieldConfig fc;
  fc.height = 64;
  fc.width = 64;
  fc.blob_count = 6;
  fc.seed = 11;
  return fc;
}

}  // namespace

TEST(Slicing, ExactTiling) {
  const auto ps = slice_into_patches(testing_support::random_field(64, 64, 1, 0.1, 1.0), 32);
  ASSERT_EQ(ps.size(), 4u);
  const std::set<std::pair<std::size_t, std::size_t>> origins{{0, 0}, {0, 32}, {32, 0}, {32, 32}};
  for (const auto& p : ps) {
    EXPECT_TRUE(origins.count({p.row, p.col}));
    EXPECT_FALSE(p.empty);
  }
}

TEST(Slicing, RemaindersDroppedAndReassemblyExact) {
  const auto f = testing_support::random_field(70, 70, 2);
  const auto ps = slice_into_patches(f, 32);
  EXPECT_EQ(ps.size(), 4u);
  EXPECT_EQ(reassemble(ps, 64, 64), f.crop(0, 0, 64, 64));
}

TEST(Slicing, AllZeroPatchIsFlaggedEmpty) {
  const auto ps = slice_into_patches(Field(32, 32, 0.0), 32);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_TRUE(ps[0].empty);
}

TEST(Slicing, TooSmallMapIsDimensionError) {
  try {
    slice_into_patches(Field(31, 64, 1.0), 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

TEST(EmissionMap, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(EmissionMap(Field(2, 2, -1.0), 0.25, DomainTag::simulated(), 0), Error);
  EXPECT_THROW(EmissionMap(Field(2, 2, NAN), 0.25, DomainTag::simulated(), 0), Error);
  EXPECT_THROW(EmissionMap(Field(2, 2, 1.0), 0.0, DomainTag::simulated(), 0), Error);
}

TEST(PatchPair, LowResolutionIsHalfSize) {
  const auto p = make_patch_pair(testing_support::random_field(32, 32, 3), "m", 0, 0, DomainTag::simulated(), 0);
  EXPECT_EQ(p.lr.rows(), 16u);
  EXPECT_EQ(p.lr.cols(), 16u);
}

TEST(SplitRandom, RoundedSizes) {
  EXPECT_EQ(sizes(split_random(manifest_of(10), {}, 7)), (std::array<std::size_t, 3>{7, 2, 1}));
  EXPECT_EQ(sizes(split_random(manifest_of(100), {}, 7)), (std::array<std::size_t, 3>{70, 20, 10}));
}

TEST(SplitRandom, DeterministicUnderSeed) {
  const auto a = split_random(manifest_of(50), {}, 3);
  EXPECT_EQ(a.records, split_random(manifest_of(50), {}, 3).records);
  const auto b = split_random(manifest_of(50), {}, 4);
  EXPECT_NE(a.records, b.records);
  EXPECT_EQ(sizes(a), sizes(b));
}

TEST(SplitRandom, ErrorsOnEmptyOrBadFractions) {
  EXPECT_THROW(split_random(DatasetManifest{}, {}, 1), Error);
  EXPECT_THROW(split_random(manifest_of(10), {0.5, 0.2, 0.2}, 1), Error);
}

TEST(SplitByYear, YearPartition) {
  const auto m = split_by_year(manifest_of(7, 2007), ByYear{2007, 2010, 2011, 2012, 1});
  EXPECT_EQ(sizes(m), (std::array<std::size_t, 3>{4, 1, 1}));
  EXPECT_EQ(m.records.size(), 6u);  // 2013 is dropped
  for (const auto& r : m.records) EXPECT_NE(r.time_index, 2013);
}

TEST(SplitByYear, PeriodGroupsFrames) {
  const auto m = split_by_year(manifest_of(48), ByYear{0, 1, 2, 3, 12});
  EXPECT_EQ(sizes(m), (std::array<std::size_t, 3>{24, 12, 12}));
}

TEST(SplitByYear, DegenerateRangesAreErrors) {
  EXPECT_THROW(split_by_year(manifest_of(6), ByYear{3, 2, 4, 5, 1}), Error);
  EXPECT_THROW(split_by_year(manifest_of(6), ByYear{0, 3, 3, 5, 1}), Error);
}

TEST(Manifest, CsvRoundTrip) {
  auto m = split_random(manifest_of(20), {}, 2);
  m.records[3].domain = DomainTag::observed(2);
  m.records[4].empty = true;
  m.records[5].offset = 4128;
  EXPECT_EQ(parse_manifest(format_manifest(m)).records, m.records);
  EXPECT_THROW(parse_manifest("bad,header\n"), Error);
}

TEST(Emg, RoundTripAtFloatPrecision) {
  const auto dir = testing_support::scratch_dir("emg");
  const EmissionMap map(testing_support::random_field(8, 6, 4), 0.5, DomainTag::observed(3), 17);
  write_emg(dir / "m.emg", map);
  const auto back = read_emg(dir / "m.emg");
  EXPECT_EQ(back.values(), round_to_f32(map.values()));
  EXPECT_EQ(back.domain(), map.domain());
  EXPECT_EQ(back.time_index(), 17);
  EXPECT_DOUBLE_EQ(back.resolution_deg(), 0.5);
}

TEST(Emg, BadMagicVersionOrLengthIsDataError) {
  const auto bytes = encode_emg(EmissionMap(Field(4, 4, 1.0), 0.25, DomainTag::simulated(), 0));
  const auto kind_of = [](std::vector<unsigned char> b) {
    try {
      decode_emg(std::move(b));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Config;
  };
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_EQ(kind_of(bad), ErrorKind::Data);
  bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(kind_of(bad), ErrorKind::Data);
  bad = bytes;
  bad.pop_back();
  EXPECT_EQ(kind_of(bad), ErrorKind::Data);
}

TEST(Generator, OceanShareAndDeterminism) {
  const auto fc = small_field();
  const auto a = gen_simulated_frame(fc, 3);
  std::size_t zeros = 0;
  for (double v : a.values().values()) zeros += v == 0.0;
  EXPECT_GE(static_cast<double>(zeros), 0.29 * a.values().size());
  EXPECT_EQ(a.values(), gen_simulated_frame(fc, 3).values());
  EXPECT_NE(a.values(), gen_simulated_frame(fc, 4).values());
  // the ocean stays the same across frames
  const auto b = gen_simulated_frame(fc, 9);
  for (std::size_t i = 0; i < a.values().size(); ++i)
    EXPECT_EQ(a.values().values()[i] == 0.0, b.values().values()[i] == 0.0);
}

TEST(Generator, TextureSpectrumFollowsSlope) {
  const std::size_t n = 64;
  std::map<int, std::pair<double, int>> bins;
  for (std::uint64_t s = 0; s < 4; ++s) {
    Rng rng(100 + s);
    const auto p = power_spectrum(power_law_field(n, n, -3.0, rng));
    for (std::size_t ky = 0; ky < n; ++ky)
      for (std::size_t kx = 0; kx < n; ++kx) {
        const int r = static_cast<int>(std::lround(radius(ky, kx, n)));
        if (r < 2 || r > 24) continue;
        bins[r].first += p(ky, kx);
        bins[r].second += 1;
      }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (const auto& [r, acc] : bins) {
    const double x = std::log(double(r)), y = std::log(acc.first / acc.second);
    sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_NEAR(slope, -3.0, 0.5);
}

TEST(ObservedShift, NullShiftIsIdentity) {
  const auto f = gen_simulated_frame(small_field(), 2);
  const auto o = derive_observed_frame(std::span(&f, 1), DomainShiftConfig::null_shift(), 5);
  EXPECT_EQ(o.values(), f.values());
  EXPECT_TRUE(o.domain().is_observed());
}

TEST(ObservedShift, BlurRemovesHighFrequencies) {
  const auto f = gen_simulated_frame(small_field(), 2);
  auto shift = DomainShiftConfig::null_shift();
  shift.blur_sigma = 1.5;
  const auto o = derive_observed_frame(std::span(&f, 1), shift, 5);
  EXPECT_LT(high_frequency_energy(o.values()), high_frequency_energy(f.values()));
}

TEST(ObservedShift, PowerLawOnTheMaximum) {
  const auto f = gen_simulated_frame(small_field(), 2);
  auto shift = DomainShiftConfig::null_shift();
  shift.gain = 3.0;
  shift.gamma = 0.8;
  const auto o = derive_observed_frame(std::span(&f, 1), shift, 5);
  EXPECT_NEAR(max_value(o.values()), 3.0 * std::pow(max_value(f.values()), 0.8), 1e-12 * max_value(o.values()));
}

TEST(ObservedShift, DefaultShiftMovesTheValueDistribution) {
  const SimulatedGenerator gen(small_field());
  std::vector<EmissionMap> frames;
  for (int t = 0; t < 6; ++t) frames.push_back(gen.frame(t));
  const auto o = derive_observed_frame(frames, DomainShiftConfig{}, 5);
  std::vector<double> s(frames[5].values().values().begin(), frames[5].values().values().end());
  std::vector<double> ov(o.values().values().begin(), o.values().values().end());
  double mean_s = 0;
  for (double v : s) mean_s += v / s.size();
  // the shift must exceed the typical magnitude of S values
  EXPECT_GT(wasserstein1(s, ov), mean_s);
  EXPECT_EQ(o.height(), 32u);
  EXPECT_DOUBLE_EQ(o.resolution_deg(), 0.5);
}

TEST(ObservedShift, MismatchedFramesAreErrors) {
  const EmissionMap a(Field(4, 4, 1.0), 0.25, DomainTag::simulated(), 0);
  const EmissionMap b(Field(4, 6, 1.0), 0.25, DomainTag::simulated(), 1);
  std::vector<EmissionMap> frames{a, b};
  EXPECT_THROW(derive_observed_frame(frames, DomainShiftConfig::null_shift(), 1), Error);
}

TEST(Wasserstein, ShiftedSampleDistance) {
  std::vector<double> a, b;
  for (int i = 0; i < 1000; ++i) {
    a.push_back(i / 1000.0);
    b.push_back(i / 1000.0 + 0.25);
  }
  EXPECT_NEAR(wasserstein1(a, b), 0.25, 1e-9);
  EXPECT_NEAR(wasserstein1(a, a), 0.0, 1e-12);
}

TEST(AreaAverage, PreservesTotalFlux) {
  const auto f = testing_support::random_field(8, 8, 6);
  const auto c = area_average(f, 2);
  double sf = 0, sc = 0;
  for (double v : f.values()) sf += v;
  for (double v : c.values()) sc += v;
  EXPECT_NEAR(4 * sc, sf, 1e-12);
  EXPECT_DOUBLE_EQ(c(1, 2), (f(2, 4) + f(2, 5) + f(3, 4) + f(3, 5)) / 4);
}

TEST(GenDataset, WindowCountsAndManifests) {
  const auto dir = testing_support::scratch_dir("gen");
  SyntheticScenario sc;
  sc.field = small_field();
  sc.n_frames = 24;
  sc.splits.by_year = ByYear{0, 1, 2, 3, 6};
  const auto ds = gen_dataset(sc, dir);
  EXPECT_EQ(ds.o_frames, 19u);
  EXPECT_EQ(ds.s_fine.records.size(), 24u * 4u);
  EXPECT_EQ(ds.s_coarse.records.size(), 24u);
  std::set<std::int64_t> o_times;
  for (const auto& r : ds.observed.records) o_times.insert(r.time_index);
  EXPECT_EQ(o_times.size(), 19u);
  EXPECT_EQ(read_manifest(dir / kObservedManifest).records, ds.observed.records);
  // by-year split: no time index in two splits
  std::map<std::int64_t, Split> seen;
  for (const auto& r : ds.observed.records) {
    auto [it, fresh] = seen.emplace(r.time_index, r.split);
    EXPECT_EQ(it->second, r.split);
  }
  const auto loaded = load_patches(ds.s_fine, dir, {Split::Train});
  EXPECT_EQ(loaded.size(), ds.s_fine.count(Split::Train));
  for (const auto& p : loaded) EXPECT_EQ(p.hr.rows(), kPatchSize);
}
