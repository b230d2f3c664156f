// SPDX-License-Identifier: Apache-2.0
#include "seal/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "seal/numerics/error.hpp"

namespace seal {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'E', 'A', 'L', 'P', 'R', 'M', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw InputError("truncated parameter file");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_parameters(std::ostream& out, const ParameterStore& store) {
  out.write(kMagic.data(), kMagic.size());
  const auto params = store.all();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) put_le<std::uint64_t>(out, d);
    for (double v : p->value.data()) put_le<double>(out, v);
  }
}

void read_parameters(std::istream& in, ParameterStore& store) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InputError("not a parameter file (bad magic)");
  const auto count = get_le<std::uint32_t>(in);
  if (count != store.size()) {
    throw InputError("parameter file holds " + std::to_string(count) + " tensors, model expects " +
                     std::to_string(store.size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = get_le<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw InputError("truncated parameter file");
    if (!store.contains(name)) throw InputError("parameter file has unknown tensor '" + name + "'");
    Parameter& p = store.get(name);
    const auto rank = get_le<std::uint32_t>(in);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    if (shape != p.value.shape()) {
      throw InputError("tensor '" + name + "' has shape " + to_string(shape) + ", model expects " +
                       to_string(p.value.shape()));
    }
    for (double& v : p.value.storage()) v = get_le<double>(in);
    if (!p.value.all_finite()) throw NumericError("tensor '" + name + "' holds non-finite values");
  }
}

void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& store,
                     const CheckpointManifest& manifest) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "params.bin", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "params.bin").string());
    write_parameters(out, store);
  }
  nlohmann::ordered_json m;
  m["config_hash"] = manifest.config_hash;
  m["step"] = manifest.step;
  m["config"] = manifest.config_json.empty() ? nlohmann::ordered_json::object()
                                             : nlohmann::ordered_json::parse(manifest.config_json);
  auto& tensors = m["tensors"] = nlohmann::ordered_json::array();
  for (const Parameter* p : store.all()) tensors.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

CheckpointManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw InputError("missing checkpoint manifest in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  CheckpointManifest out;
  out.config_hash = m.value("config_hash", "");
  out.step = m.value("step", std::uint64_t{0});
  if (m.contains("config")) out.config_json = m["config"].dump();
  return out;
}

CheckpointManifest load_checkpoint(const std::filesystem::path& dir, ParameterStore& store) {
  CheckpointManifest manifest = read_manifest(dir);
  std::ifstream in(dir / "params.bin", std::ios::binary);
  if (!in) throw InputError("missing params.bin in " + dir.string());
  read_parameters(in, store);
  return manifest;
}

}  // namespace seal
