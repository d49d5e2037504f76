/**
 * Copyright 2026 The silrel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "silrel/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace silrel::ad {
namespace {

constexpr char kMagic[8] = {'S', 'I', 'L', 'C', 'K', 'P', 'T', '1'};
// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 36;

void put_u64(std::ostream& os, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
        throw std::runtime_error("checkpoint: unexpected end of file");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

std::uint64_t get_length(std::istream& is) {
    const std::uint64_t n = get_u64(is);
    if (n > kMaxLength) throw std::runtime_error("checkpoint: corrupt length field");
    return n;
}

std::string get_string(std::istream& is) {
    std::string s(get_length(is), '\0');
    if (!s.empty() && !is.read(s.data(), static_cast<std::streamsize>(s.size()))) {
        throw std::runtime_error("checkpoint: unexpected end of file");
    }
    return s;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string());
    os.write(kMagic, sizeof kMagic);
    put_u64(os, checkpoint.manifest.size());
    os.write(checkpoint.manifest.data(), static_cast<std::streamsize>(checkpoint.manifest.size()));
    put_u64(os, checkpoint.tensors.size());
    for (const auto& [name, tensor] : checkpoint.tensors) {
        put_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(os, tensor.rank());
        for (std::size_t extent : tensor.shape()) put_u64(os, extent);
        for (double v : tensor.values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("checkpoint: " + path.string() + " is not a checkpoint file");
    }
    Checkpoint ckpt;
    ckpt.manifest = get_string(is);
    const std::uint64_t count = get_length(is);
    for (std::uint64_t t = 0; t < count; ++t) {
        std::string name = get_string(is);
        const std::uint64_t rank = get_length(is);
        Shape shape(rank);
        for (auto& extent : shape) extent = get_length(is);
        std::vector<double> values(shape_size(shape));
        for (double& v : values) v = std::bit_cast<double>(get_u64(is));
        if (!ckpt.tensors.emplace(name, Tensor(std::move(shape), std::move(values), true)).second) {
            throw std::runtime_error("checkpoint: duplicate tensor name " + name);
        }
    }
    return ckpt;
}

}  // namespace silrel::ad
