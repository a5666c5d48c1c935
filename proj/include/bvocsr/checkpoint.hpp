#pragma once

// SRCK v1 checkpoints (little-endian):
//   "SRCK" | u32 version=1 | u32 channels | u32 blocks | u32 attention_reduction | u32 scale | u32 kernel |
//   u32 provenance code | f32 provenance fraction | u64 train_seed | u32 epoch |
//   u32 has_optimizer | u64 optimizer step | u32 tensor count |
//   per tensor: u32 name length | UTF-8 name | u32 ndim | u32 dims[ndim] | f32 data
// Optimizer moments, when present, follow the parameters as "adam.m/<name>" and "adam.v/<name>".

#include <charconv>
#include <filesystem>
#include <optional>

#include "bvocsr/binary_io.hpp"
#include "bvocsr/emission.hpp"
#include "bvocsr/optim.hpp"
#include "bvocsr/text.hpp"

namespace bvocsr {

struct Provenance {
  enum class Kind : std::uint32_t { TrainedOnS = 0, TrainedOnST = 1, FineTunedDA = 2, TrainedOnO = 3, Initialized = 4 };

  Kind kind = Kind::Initialized;
  float injection_fraction = 0.0f;  // FineTunedDA only

  std::string label() const {
    switch (kind) {
      case Kind::TrainedOnS:
        return "TrainedOnS";
      case Kind::TrainedOnST:
        return "TrainedOnST";
      case Kind::FineTunedDA:
      {
        // shortest float spelling, so 0.6f prints as 0.6
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, injection_fraction).ptr;
        return "FineTunedDA(" + std::string(buf, end) + ")";
      }
      case Kind::TrainedOnO:
        return "TrainedOnO";
      case Kind::Initialized:
        return "Initialized";
    }
    return "?";
  }

  bool operator==(const Provenance&) const = default;
};

/// Provenance of a network trained from scratch on a given domain.
inline Provenance provenance_for(const DomainTag& d) {
  switch (d.kind) {
    case DomainTag::Kind::Simulated:
      return {Provenance::Kind::TrainedOnS, 0.0f};
    case DomainTag::Kind::SimulatedTimeLimited:
      return {Provenance::Kind::TrainedOnST, 0.0f};
    case DomainTag::Kind::Observed:
      return {Provenance::Kind::TrainedOnO, 0.0f};
  }
  return {};
}

struct Checkpoint {
  NetworkConfig config;
  Parameters<float> params;
  Provenance provenance;
  std::optional<AdamState<float>> optimizer;
  std::uint64_t train_seed = 0;
  std::uint32_t epoch = 0;

  SrNetwork<float> network() const { return SrNetwork<float>(config, params); }

  bool operator==(const Checkpoint&) const = default;
};

inline Checkpoint init_checkpoint(const NetworkConfig& cfg, std::uint64_t seed) {
  Checkpoint ck;
  ck.config = cfg;
  ck.params = init_parameters<float>(cfg, seed);
  ck.train_seed = seed;
  return ck;
}

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_tensor(std::vector<unsigned char>& buf, const std::string& name, const ParamTensor<float>& t) {
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
  io::put_bytes(buf, name);
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d));
  for (float v : t.data) io::put_le<float>(buf, v);
}

inline ParamTensor<float> get_tensor(io::Reader& in) {
  ParamTensor<float> t;
  const auto len = in.get<std::uint32_t>();
  if (len > 4096) fail(ErrorKind::Data, in.origin() + ": implausible tensor name length");
  t.name = in.get_bytes(len);
  const auto ndim = in.get<std::uint32_t>();
  if (ndim > 8) fail(ErrorKind::Data, in.origin() + ": implausible tensor rank for '" + t.name + "'");
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    t.dims.push_back(in.get<std::uint32_t>());
    n *= t.dims.back();
  }
  if (n * 4 > in.remaining()) fail(ErrorKind::Data, in.origin() + ": truncated data for tensor '" + t.name + "'");
  t.data.resize(n);
  for (auto& v : t.data) v = in.get<float>();
  return t;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Checkpoint& ck) {
  std::vector<unsigned char> buf;
  io::put_bytes(buf, "SRCK");
  io::put_le<std::uint32_t>(buf, kCheckpointVersion);
  io::put_le<std::uint32_t>(buf, ck.config.channels);
  io::put_le<std::uint32_t>(buf, ck.config.blocks);
  io::put_le<std::uint32_t>(buf, ck.config.attention_reduction);
  io::put_le<std::uint32_t>(buf, ck.config.scale);
  io::put_le<std::uint32_t>(buf, ck.config.kernel);
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ck.provenance.kind));
  io::put_le<float>(buf, ck.provenance.injection_fraction);
  io::put_le<std::uint64_t>(buf, ck.train_seed);
  io::put_le<std::uint32_t>(buf, ck.epoch);
  io::put_le<std::uint32_t>(buf, ck.optimizer ? 1u : 0u);
  io::put_le<std::uint64_t>(buf, ck.optimizer ? ck.optimizer->step : 0u);
  const std::size_t n = ck.params.tensors.size();
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ck.optimizer ? 3 * n : n));
  for (const auto& t : ck.params.tensors) detail::put_tensor(buf, t.name, t);
  if (ck.optimizer) {
    for (const auto& t : ck.optimizer->m.tensors) detail::put_tensor(buf, "adam.m/" + t.name, t);
    for (const auto& t : ck.optimizer->v.tensors) detail::put_tensor(buf, "adam.v/" + t.name, t);
  }
  return buf;
}

inline Checkpoint decode_checkpoint(std::vector<unsigned char> bytes, const std::string& origin = "checkpoint") {
  io::Reader in(std::move(bytes), origin);
  if (in.get_bytes(4) != "SRCK") fail(ErrorKind::Data, origin + ": bad magic (expected SRCK)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) fail(ErrorKind::Data, origin + ": unsupported SRCK version " + std::to_string(version));
  Checkpoint ck;
  ck.config.channels = in.get<std::uint32_t>();
  ck.config.blocks = in.get<std::uint32_t>();
  ck.config.attention_reduction = in.get<std::uint32_t>();
  ck.config.scale = in.get<std::uint32_t>();
  ck.config.kernel = in.get<std::uint32_t>();
  try {
    ck.config.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Data, origin + ": invalid network config: " + e.what());
  }
  const auto prov = in.get<std::uint32_t>();
  if (prov > 4) fail(ErrorKind::Data, origin + ": unknown provenance code " + std::to_string(prov));
  ck.provenance.kind = static_cast<Provenance::Kind>(prov);
  ck.provenance.injection_fraction = in.get<float>();
  ck.train_seed = in.get<std::uint64_t>();
  ck.epoch = in.get<std::uint32_t>();
  const bool has_opt = in.get<std::uint32_t>() != 0;
  const auto opt_step = in.get<std::uint64_t>();
  const auto count = in.get<std::uint32_t>();

  const auto layout = parameter_layout(ck.config);
  const std::size_t n = layout.size();
  if (count != (has_opt ? 3 * n : n))
    fail(ErrorKind::Data, origin + ": tensor count " + std::to_string(count) + " does not match config");
  const auto read_group = [&](const std::string& prefix) {
    Parameters<float> p;
    for (const auto& spec : layout) {
      auto t = detail::get_tensor(in);
      if (t.name != prefix + spec.name || t.dims != spec.dims)
        fail(ErrorKind::Data, origin + ": tensor '" + t.name + "' does not match expected '" + prefix + spec.name + "'");
      t.name = spec.name;
      p.tensors.push_back(std::move(t));
    }
    return p;
  };
  ck.params = read_group("");
  if (has_opt) {
    AdamState<float> st;
    st.m = read_group("adam.m/");
    st.v = read_group("adam.v/");
    st.step = opt_step;
    ck.optimizer = std::move(st);
  }
  if (in.remaining() != 0) fail(ErrorKind::Data, origin + ": trailing bytes after last tensor");
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  io::write_file(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path), path.string());
}

}  // namespace bvocsr
