#include "alteraser/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "alteraser/errors.hpp"

namespace alteraser {

namespace {

constexpr char kMagic[4] = {'A', 'L', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64_array(std::ostream& out, const double* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError(path + ": truncated checkpoint");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return x;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError(path + ": truncated checkpoint");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

void get_f64_array(std::istream& in, double* data, std::size_t count, const std::string& path) {
  for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_u64(in, path));
}

nlohmann::json weights_to_json(const WeightScheme& w) {
  nlohmann::json j;
  if (w.kind == WeightKind::uniform) {
    j["kind"] = "uniform";
    j["w0"] = w.w0;
  } else {
    j["kind"] = "item_popularity";
    j["w0_cap"] = w.w0_cap;
    j["w0_per_item"] = std::vector<double>(w.w0_per_item.data(),
                                           w.w0_per_item.data() + w.w0_per_item.size());
  }
  return j;
}

WeightScheme weights_from_json(const nlohmann::json& j, const std::string& path) {
  WeightScheme w;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    w.kind = WeightKind::uniform;
    w.w0 = j.at("w0").get<double>();
  } else if (kind == "item_popularity") {
    w.kind = WeightKind::item_popularity;
    w.w0_cap = j.at("w0_cap").get<double>();
    const auto vals = j.at("w0_per_item").get<std::vector<double>>();
    w.w0_per_item = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  } else {
    throw DataError(path + ": unknown weight scheme '" + kind + "'");
  }
  return w;
}

}  // namespace

void save_checkpoint(const ModelState& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, static_cast<std::uint64_t>(model.num_users()));
  put_u64(out, static_cast<std::uint64_t>(model.num_items()));
  put_u64(out, static_cast<std::uint64_t>(model.dim()));
  put_f64_array(out, model.P().data(), static_cast<std::size_t>(model.P().size()));
  put_f64_array(out, model.Q().data(), static_cast<std::size_t>(model.Q().size()));
  put_f64_array(out, model.h().data(), static_cast<std::size_t>(model.h().size()));
  nlohmann::json hyper;
  hyper["lambda"] = model.lambda();
  hyper["weights"] = weights_to_json(model.weights());
  hyper["seed"] = model.init_seed();
  const std::string blob = hyper.dump();
  put_u32(out, static_cast<std::uint32_t>(blob.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError(path + ": write failed");
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open");
  char magic[4];
  if (!in.read(magic, 4)) throw DataError(path + ": truncated checkpoint");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError(path + ": bad checkpoint magic");
  const std::uint32_t version = get_u32(in, path);
  if (version != kVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  const auto m = get_u64(in, path);
  const auto n = get_u64(in, path);
  const auto d = get_u64(in, path);
  constexpr std::uint64_t kSane = 1ull << 32;
  if (m == 0 || n == 0 || d == 0 || m > kSane || n > kSane || d > kSane || m * d > kSane ||
      n * d > kSane)
    throw DataError(path + ": implausible checkpoint dimensions");
  RowMatrixXd P(m, d), Q(n, d);
  Eigen::VectorXd h(d);
  get_f64_array(in, P.data(), static_cast<std::size_t>(P.size()), path);
  get_f64_array(in, Q.data(), static_cast<std::size_t>(Q.size()), path);
  get_f64_array(in, h.data(), static_cast<std::size_t>(h.size()), path);
  const std::uint32_t blob_len = get_u32(in, path);
  std::string blob(blob_len, '\0');
  if (!in.read(blob.data(), blob_len)) throw DataError(path + ": truncated checkpoint");
  nlohmann::json hyper;
  try {
    hyper = nlohmann::json::parse(blob);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad hyperparameter blob: " + e.what());
  }
  return ModelState(std::move(P), std::move(Q), std::move(h),
                    weights_from_json(hyper.at("weights"), path),
                    hyper.at("lambda").get<double>(), hyper.at("seed").get<std::uint64_t>());
}

}  // namespace alteraser
