/* Copyright 2026 The GRoIE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "groie/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "groie/errors.hpp"

namespace groie::harness {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'G', 'R', 'I', 'E'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw InputError("truncated checkpoint " + path);
  return v;
}

}  // namespace

void save_checkpoint(const ParamStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& p : store) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(p->value.ptr()),
              static_cast<std::streamsize>(p->value.numel() * sizeof(double)));
  }
  if (!out) throw InputError("failed writing " + path);
}

void load_checkpoint(ParamStore& store, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InputError(path + " is not a checkpoint");
  const auto version = take<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, Tensor> records;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto len = take<std::uint32_t>(in, path);
    if (len > 4096) throw InputError("corrupt checkpoint " + path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rank = take<std::uint32_t>(in, path);
    if (rank > 4) throw InputError("corrupt checkpoint " + path);
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<std::int64_t>(take<std::uint64_t>(in, path)));
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!in) throw InputError("truncated checkpoint " + path);
    if (!records.emplace(name, std::move(t)).second) throw InputError("duplicate record '" + name + "'");
  }
  for (auto& p : store) {
    auto it = records.find(p->name);
    if (it == records.end()) throw ConfigError("checkpoint has no parameter '" + p->name + "'");
    if (it->second.shape() != p->value.shape()) {
      throw ConfigError("parameter '" + p->name + "' is " + shape_str(p->value.shape()) + " in the model but " +
                        shape_str(it->second.shape()) + " in the checkpoint");
    }
  }
  if (records.size() != store.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(records.size()) + " parameters, model has " +
                      std::to_string(store.size()));
  }
  for (auto& p : store) p->value = std::move(records.at(p->name));
}

}  // namespace groie::harness
