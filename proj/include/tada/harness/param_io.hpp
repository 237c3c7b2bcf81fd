#pragma once

// Flat binary parameter dump:
//   "TADAPRM1" | u32 scalar bytes | u64 count |
//   count x { u32 name length | name | u32 rank | rank x u64 dim | values }
// Integers and values are written in host byte order.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tada/core/errors.hpp"
#include "tada/core/tape.hpp"

namespace tada::harness {

namespace detail {
template <class U>
void put(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}
template <class U>
U take(std::istream& is, const std::string& path) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(U))) throw ConfigError(path + ": truncated parameter file");
  return v;
}
constexpr char kMagic[8] = {'T', 'A', 'D', 'A', 'P', 'R', 'M', '1'};
}  // namespace detail

template <class T>
void save_parameters(std::ostream& os, const std::vector<Parameter<T>*>& params,
                     const std::string& path = "<stream>") {
  os.write(detail::kMagic, sizeof(detail::kMagic));
  detail::put<std::uint32_t>(os, sizeof(T));
  detail::put<std::uint64_t>(os, params.size());
  for (const auto* p : params) {
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) detail::put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(p->value.data().data()),
             static_cast<std::streamsize>(p->value.numel() * sizeof(T)));
  }
  if (!os) throw ConfigError("failed writing parameter file '" + path + "'");
}

template <class T>
void save_parameters(const std::string& path, const std::vector<Parameter<T>*>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write parameter file '" + path + "'");
  save_parameters(os, params, path);
}

/// Loads every stored tensor into the parameter of the same name. Names
/// present on only one side are an error; so are shape or dtype mismatches.
template <class T>
std::size_t load_parameters(std::istream& is, const std::vector<Parameter<T>*>& params,
                            const std::string& path = "<stream>") {
  char magic[sizeof(detail::kMagic)];
  if (!is.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), detail::kMagic)) {
    throw ConfigError(path + ": not a parameter file");
  }
  if (detail::take<std::uint32_t>(is, path) != sizeof(T)) throw ConfigError(path + ": scalar type mismatch");
  std::map<std::string, Parameter<T>*> by_name;
  for (auto* p : params) by_name[p->name] = p;
  const auto count = detail::take<std::uint64_t>(is, path);
  if (count != params.size()) {
    throw ConfigError(path + ": holds " + std::to_string(count) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = detail::take<std::uint32_t>(is, path);
    if (name_len > 4096) throw ConfigError(path + ": corrupt tensor name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(name.size()))) throw ConfigError(path + ": truncated");
    const auto rank = detail::take<std::uint32_t>(is, path);
    if (rank > 8) throw ConfigError(path + ": corrupt tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = detail::take<std::uint64_t>(is, path);
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError(path + ": unknown tensor '" + name + "'");
    if (it->second->value.shape() != shape) {
      throw ConfigError(path + ": '" + name + "' has shape " + shape_str(shape) + ", model expects " +
                        shape_str(it->second->value.shape()));
    }
    Tensor<T> v(shape);
    if (!is.read(reinterpret_cast<char*>(v.data().data()), static_cast<std::streamsize>(v.numel() * sizeof(T)))) {
      throw ConfigError(path + ": truncated data for '" + name + "'");
    }
    it->second->value = std::move(v);
  }
  return static_cast<std::size_t>(count);
}

template <class T>
std::size_t load_parameters(const std::string& path, const std::vector<Parameter<T>*>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open parameter file '" + path + "'");
  return load_parameters(is, params, path);
}

}  // namespace tada::harness
