#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molgen/nn/tape.hpp"

namespace molgen::nn {

struct NamedTensor {
  std::string name;
  Mat<float> data;
};

struct Checkpoint {
  int version = 1;
  std::string kind;
  std::uint64_t seed = 0;
  std::string arch_json;  // architecture descriptor, verbatim JSON
  std::vector<std::string> order;
  std::map<std::string, Mat<float>> tensors;
};

/// Container layout: 8-byte magic "MOLGENC1", u64 little-endian header
/// length, JSON header {version, kind, seed, arch, tensors:[{name,rows,cols}]},
/// then raw little-endian float32 blocks, row-major, in header order.
void save_checkpoint(const std::string& path, const std::string& kind,
                     std::uint64_t seed, const std::string& arch_json,
                     const std::vector<NamedTensor>& tensors);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace molgen::nn
