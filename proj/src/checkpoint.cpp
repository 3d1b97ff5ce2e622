// Copyright 2026 The milnet authors
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

#include "milnet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace milnet {

namespace {

constexpr char kMagic[8] = {'M', 'I', 'L', 'N', 'E', 'T', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  const char* raw(std::size_t n) {
    need(n);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError("checkpoint '" + path_ + "' is truncated");
    }
  }

  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_named_tensors(const std::string& path,
                        const std::map<std::string, Tensor>& entries) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(entries.size()));

  std::string payload;
  for (const auto& [name, tensor] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    out.push_back(static_cast<char>(tensor.rank()));
    for (int d : tensor.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    std::string data;
    data.reserve(static_cast<std::size_t>(tensor.size()) * 8);
    for (std::int64_t i = 0; i < tensor.size(); ++i) put_f64(data, tensor[i]);
    out.append(data);
    payload.append(data);
  }
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0, reinterpret_cast<const Bytef*>(payload.data()),
                         static_cast<uInt>(payload.size()))));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw ValidationError("failed writing checkpoint '" + path + "'");
  }
}

std::map<std::string, Tensor> load_named_tensors(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open checkpoint '" + path + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

  Reader r(bytes, path);
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ValidationError("'" + path + "' is not a MILNET1 checkpoint");
  }
  const std::uint32_t count = r.u32();

  std::map<std::string, Tensor> entries;
  std::string payload;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = r.u32();
    std::string name = r.str(name_len);
    const int rank = r.u8();
    std::vector<int> dims(static_cast<std::size_t>(rank));
    std::int64_t n = 1;
    for (int i = 0; i < rank; ++i) {
      dims[static_cast<std::size_t>(i)] = static_cast<int>(r.u32());
      n *= dims[static_cast<std::size_t>(i)];
    }
    const char* raw = r.raw(static_cast<std::size_t>(n) * 8);
    payload.append(raw, static_cast<std::size_t>(n) * 8);
    std::vector<double> data(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(
                    static_cast<unsigned char>(raw[i * 8 + b])) << (8 * b);
      }
      data[static_cast<std::size_t>(i)] = std::bit_cast<double>(bits);
    }
    entries[name] = Tensor(std::move(dims), std::move(data));
  }

  const std::uint32_t stored_crc = r.u32();
  const std::uint32_t actual_crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
  if (stored_crc != actual_crc) {
    throw ValidationError("checkpoint '" + path + "' failed its CRC32 check");
  }
  if (r.remaining() != 0) {
    throw ValidationError("checkpoint '" + path + "' has trailing bytes");
  }
  return entries;
}

namespace {

Tensor scalar_tensor(double v) { return Tensor({1}, {v}); }

Tensor vec_tensor(const std::vector<int>& v) {
  Tensor t({static_cast<int>(v.size())});
  for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<std::int64_t>(i)] = v[i];
  return t;
}

}  // namespace

void save_network(const std::string& path, const Network& net) {
  std::map<std::string, Tensor> entries = net.params();
  const ModelConfig& c = net.config();
  entries["meta.variant"] = scalar_tensor(static_cast<double>(c.variant));
  entries["meta.num_classes"] = scalar_tensor(c.num_classes);
  entries["meta.backbone_channels"] = vec_tensor(c.backbone_channels);
  entries["meta.roi_out"] = scalar_tensor(c.roi_out);
  entries["meta.head_hidden"] = vec_tensor(c.head_hidden);
  // Bit-cast keeps 64-bit seeds exact; they are opaque metadata here.
  entries["meta.seed"] = scalar_tensor(std::bit_cast<double>(c.seed));
  save_named_tensors(path, entries);
}

Network load_network(const std::string& path) {
  std::map<std::string, Tensor> entries = load_named_tensors(path);
  auto take_meta = [&](const std::string& name) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      throw ValidationError("checkpoint '" + path + "' is missing " + name);
    }
    Tensor t = std::move(it->second);
    entries.erase(it);
    return t;
  };

  ModelConfig cfg;
  cfg.variant = static_cast<Variant>(
      static_cast<int>(take_meta("meta.variant")[0]));
  cfg.num_classes = static_cast<int>(take_meta("meta.num_classes")[0]);
  Tensor bc = take_meta("meta.backbone_channels");
  cfg.backbone_channels.clear();
  for (std::int64_t i = 0; i < bc.size(); ++i) {
    cfg.backbone_channels.push_back(static_cast<int>(bc[i]));
  }
  cfg.roi_out = static_cast<int>(take_meta("meta.roi_out")[0]);
  Tensor hh = take_meta("meta.head_hidden");
  cfg.head_hidden.clear();
  for (std::int64_t i = 0; i < hh.size(); ++i) {
    cfg.head_hidden.push_back(static_cast<int>(hh[i]));
  }
  cfg.seed = std::bit_cast<std::uint64_t>(take_meta("meta.seed")[0]);

  Network net = Network::build(cfg);
  if (entries.size() != net.params().size()) {
    throw ValidationError("checkpoint '" + path + "' parameter set does not "
                          "match the stored config");
  }
  for (auto& [name, tensor] : net.params()) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      throw ValidationError("checkpoint '" + path + "' is missing parameter '" +
                            name + "'");
    }
    if (it->second.dims() != tensor.dims()) {
      throw ValidationError("checkpoint '" + path + "' parameter '" + name +
                            "' has shape " + it->second.dims_str() +
                            ", expected " + tensor.dims_str());
    }
    tensor = std::move(it->second);
  }
  return net;
}

}  // namespace milnet
