#include "molgen/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "molgen/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace molgen::nn {

namespace {
constexpr char kMagic[8] = {'M', 'O', 'L', 'G', 'E', 'N', 'C', '1'};
}

void save_checkpoint(const std::string& path, const std::string& kind,
                     std::uint64_t seed, const std::string& arch_json,
                     const std::vector<NamedTensor>& tensors) {
  nlohmann::json header;
  header["version"] = 1;
  header["kind"] = kind;
  header["seed"] = seed;
  header["arch"] = arch_json.empty() ? nlohmann::json::object()
                                     : nlohmann::json::parse(arch_json);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : tensors)
    list.push_back({{"name", t.name},
                    {"rows", t.data.rows()},
                    {"cols", t.data.cols()}});
  header["tensors"] = list;
  std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  std::uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& t : tensors)
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (!out) throw IOError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IOError("not a checkpoint file: " + path);
  std::uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
  if (!in || head_len > (1ull << 30)) throw IOError("corrupt checkpoint header");
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw IOError("truncated checkpoint header");

  nlohmann::json header = nlohmann::json::parse(head);
  Checkpoint cp;
  cp.version = header.at("version").get<int>();
  cp.kind = header.at("kind").get<std::string>();
  cp.seed = header.at("seed").get<std::uint64_t>();
  cp.arch_json = header.at("arch").dump();
  for (const auto& item : header.at("tensors")) {
    std::string name = item.at("name").get<std::string>();
    Eigen::Index rows = item.at("rows").get<Eigen::Index>();
    Eigen::Index cols = item.at("cols").get<Eigen::Index>();
    Mat<float> m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!in) throw IOError("truncated tensor block: " + name);
    cp.order.push_back(name);
    cp.tensors.emplace(std::move(name), std::move(m));
  }
  return cp;
}

}  // namespace molgen::nn
