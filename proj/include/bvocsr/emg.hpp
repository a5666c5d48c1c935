#pragma once

// EMG v1 grid files (little-endian):
//   "EMGR" | u32 version=1 | u32 height | u32 width | f64 resolution_deg |
//   u32 domain code | u32 time_index | height*width f32 values, row-major

#include <filesystem>
#include <limits>

#include "bvocsr/binary_io.hpp"
#include "bvocsr/emission.hpp"

namespace bvocsr {

inline constexpr std::uint32_t kEmgVersion = 1;

inline std::vector<unsigned char> encode_emg(const EmissionMap& map) {
  require(map.time_index() >= 0 && map.time_index() <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::Data,
          "time_index out of EMG range");
  std::vector<unsigned char> buf;
  buf.reserve(32 + map.values().size() * 4);
  io::put_bytes(buf, "EMGR");
  io::put_le<std::uint32_t>(buf, kEmgVersion);
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(map.height()));
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(map.width()));
  io::put_le<double>(buf, map.resolution_deg());
  io::put_le<std::uint32_t>(buf, map.domain().code());
  io::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(map.time_index()));
  for (double v : map.values().values()) io::put_le<float>(buf, static_cast<float>(v));
  return buf;
}

inline EmissionMap decode_emg(std::vector<unsigned char> bytes, const std::string& origin = "EMG") {
  io::Reader in(std::move(bytes), origin);
  if (in.get_bytes(4) != "EMGR") fail(ErrorKind::Data, origin + ": bad magic (expected EMGR)");
  const auto version = in.get<std::uint32_t>();
  if (version != kEmgVersion) fail(ErrorKind::Data, origin + ": unsupported EMG version " + std::to_string(version));
  const auto h = in.get<std::uint32_t>();
  const auto w = in.get<std::uint32_t>();
  const auto res = in.get<double>();
  const auto domain = DomainTag::from_code(in.get<std::uint32_t>());
  const auto t = in.get<std::uint32_t>();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (in.remaining() != n * 4) fail(ErrorKind::Data, origin + ": payload size does not match header");
  Field values(h, w);
  for (auto& v : values.values()) v = static_cast<double>(in.get<float>());
  return EmissionMap(std::move(values), res, domain, t);
}

inline void write_emg(const std::filesystem::path& path, const EmissionMap& map) {
  io::write_file(path, encode_emg(map));
}

inline EmissionMap read_emg(const std::filesystem::path& path) { return decode_emg(io::read_file(path), path.string()); }

/// Values as they come back from disk (f32 precision), so in-memory and on-disk datasets agree bit-exactly.
inline Field round_to_f32(Field f) {
  for (auto& v : f.values()) v = static_cast<double>(static_cast<float>(v));
  return f;
}

}  // namespace bvocsr
