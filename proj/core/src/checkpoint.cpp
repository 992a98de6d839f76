#include "emdlot/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace emdlot {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  const auto len = read_pod<uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, EmdlotModel& model,
                     const TrainConfig& config) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp);
    out.write(kMagic, 4);
    write_pod<uint32_t>(out, kVersion);

    nlohmann::json meta;
    meta["train_config"] = nlohmann::json::parse(config.to_json_text());
    const auto& mc = model.config();
    meta["n_features"] = mc.n_features;
    meta["d_ch"] = mc.d_ch;
    meta["feature_names"] = mc.feature_names;
    write_string(out, meta.dump());

    auto params = model.params();
    write_pod<uint32_t>(out, static_cast<uint32_t>(params.size()));
    for (Param* p : params) {
      write_string(out, p->name);
      write_pod<uint32_t>(out, static_cast<uint32_t>(p->value.shape.size()));
      for (size_t d : p->value.shape) write_pod<uint64_t>(out, d);
      out.write(reinterpret_cast<const char*>(p->value.v.data()),
                static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  const auto version = read_pod<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  nlohmann::json meta = nlohmann::json::parse(read_string(in));
  Checkpoint ck;
  ck.config = TrainConfig::from_json_text(meta.at("train_config").dump());
  std::vector<std::string> names = meta.at("feature_names").get<std::vector<std::string>>();
  ck.model = EmdlotModel(model_config(ck.config, meta.at("n_features").get<int>(),
                                      meta.at("d_ch").get<int>(), std::move(names)));

  auto params = ck.model.params();
  const auto count = read_pod<uint32_t>(in);
  if (count != params.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (Param* p : params) {
    const std::string name = read_string(in);
    if (name != p->name)
      throw std::runtime_error("checkpoint: tensor order mismatch at " + name);
    const auto ndim = read_pod<uint32_t>(in);
    std::vector<size_t> shape(ndim);
    for (auto& d : shape) d = static_cast<size_t>(read_pod<uint64_t>(in));
    if (shape != p->value.shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    in.read(reinterpret_cast<char*>(p->value.v.data()),
            static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
  }
  return ck;
}

}  // namespace emdlot
