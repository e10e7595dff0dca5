// Copyright 2026 The idread Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idread/tensornet.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "json.hpp"

#include "idread/raster.hpp"

namespace idread::nn {

std::vector<LayerSpec> classifier_layers(int blocks, int filters, int classes) {
  if (blocks < 1 || filters < 1 || classes < 1) throw Error(ErrorKind::UnsupportedConfig, "blocks/filters/classes >= 1");
  std::vector<LayerSpec> layers;
  for (int b = 0; b < blocks; ++b) {
    layers.emplace_back(ConvSpec{5, filters});
    layers.emplace_back(MaxPoolSpec{});
  }
  layers.emplace_back(FlattenSpec{});
  layers.emplace_back(DenseSpec{classes});
  layers.emplace_back(SoftmaxSpec{});
  return layers;
}

std::int64_t param_count(int blocks, int filters, int height, int width, int channels, int classes, int kernel) {
  if (blocks < 1 || filters < 1 || kernel < 1) throw Error(ErrorKind::UnsupportedConfig, "invalid configuration");
  const int div = 1 << blocks;
  if (height % div != 0 || width % div != 0)
    throw Error(ErrorKind::UnsupportedConfig, "input size not divisible by 2^blocks");
  std::int64_t total = 0;
  std::int64_t c_in = channels;
  for (int b = 0; b < blocks; ++b) {
    total += static_cast<std::int64_t>(kernel) * kernel * c_in * filters + filters;
    c_in = filters;
  }
  const std::int64_t flat = static_cast<std::int64_t>(height / div) * (width / div) * filters;
  total += flat * classes + classes;
  return total;
}

std::string format_param_count(std::int64_t count) {
  char buf[32];
  if (count >= 100000) {
    const double m = static_cast<double>(count) / 1e6;
    // Two significant figures: one decimal at or above 1M, two below.
    std::snprintf(buf, sizeof buf, m >= 1.0 ? "%.1fM" : "%.2fM", m);
  } else if (count >= 1000) {
    const double k = static_cast<double>(count) / 1e3;
    std::snprintf(buf, sizeof buf, k >= 10.0 ? "%.0fk" : "%.1fk", k);
  } else {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(count));
  }
  return buf;
}

namespace {

constexpr char kMagic[4] = {'I', 'D', 'R', 'N'};
constexpr std::uint8_t kVersion = 0x01;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const Network<float>& net, const WeightsHeader& header) {
  nlohmann::json h;
  h["blocks"] = header.blocks;
  h["filters"] = header.filters;
  h["classes"] = header.classes;
  h["input"] = header.input;
  h["tensors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < net.params().size(); ++i)
    h["tensors"].push_back({{"name", net.param_names()[i]}, {"shape", net.params()[i].shape}});
  const std::string text = h.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : net.params()) {
    for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void save_weights(const Network<float>& net, const WeightsHeader& header, const std::filesystem::path& path) {
  raster::write_file(path, serialize_weights(net, header));
}

Network<float> deserialize_weights(std::span<const std::uint8_t> bytes, WeightsHeader* header_out) {
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorKind::FormatError, "bad magic; not an IDRN weights file");
  if (bytes[4] != kVersion) throw Error(ErrorKind::FormatError, "unsupported weights format version");
  const std::uint32_t header_len = get_u32(bytes.data() + 5);
  if (bytes.size() < 9 + static_cast<std::size_t>(header_len)) throw Error(ErrorKind::FormatError, "truncated header");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 9, bytes.begin() + 9 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("bad header JSON: ") + e.what());
  }
  WeightsHeader header;
  Network<float> net;
  try {
    header.blocks = h.at("blocks").get<int>();
    header.filters = h.at("filters").get<int>();
    header.classes = h.at("classes").get<int>();
    header.input = h.at("input").get<std::vector<int>>();
    net = Network<float>(classifier_layers(header.blocks, header.filters, header.classes), header.input);
    const auto& tensors = h.at("tensors");
    if (tensors.size() != net.params().size()) throw Error(ErrorKind::FormatError, "tensor count mismatch");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != net.param_names()[i] ||
          tensors[i].at("shape").get<std::vector<int>>() != net.params()[i].shape)
        throw Error(ErrorKind::FormatError, "tensor " + std::to_string(i) + " name/shape mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("bad header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FormatError) throw;
    throw Error(ErrorKind::FormatError, e.what());
  }

  std::size_t offset = 9 + header_len;
  const std::size_t expected = offset + static_cast<std::size_t>(net.param_count()) * 4;
  if (bytes.size() != expected) throw Error(ErrorKind::FormatError, "data size does not match header");
  for (auto& t : net.params()) {
    for (float& v : t.data) {
      v = std::bit_cast<float>(get_u32(bytes.data() + offset));
      offset += 4;
    }
  }
  if (header_out) *header_out = header;
  return net;
}

Network<float> load_weights(const std::filesystem::path& path, WeightsHeader* header) {
  return deserialize_weights(raster::read_file(path), header);
}

}  // namespace idread::nn
