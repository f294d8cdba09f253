#include <bit>
#include <cmath>
#include <fmt/core.h>
#include <json.hpp>

#include "biaskit/core/files.hpp"
#include "internal.hpp"

namespace biaskit::svm {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "BKSVM";

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string serialize_model(const SvmModel& m) {
  json machines = json::array();
  for (const auto& mc : m.machines) {
    machines.push_back({{"positive", mc.positive},
                        {"negative", mc.negative},
                        {"sv", mc.sv},
                        {"coef", mc.coef},
                        {"rho", mc.rho},
                        {"platt", {{"a", mc.platt.a}, {"b", mc.platt.b}}}});
  }
  json header = {{"label_order", m.label_order},
                 {"kernel", {{"type", "rbf"}, {"gamma", m.gamma}}},
                 {"machines", machines},
                 {"meta",
                  {{"c", m.c},
                   {"seed", m.seed},
                   {"calibrated", m.calibrated},
                   {"feature_dim", m.feature_dim()},
                   {"n_sv", m.support_vectors.rows},
                   {"sv_train_index", m.sv_train_index}}}};
  const std::string text = header.dump();
  std::string out(kMagic);
  put_le(out, kModelVersion, 4);
  put_le(out, text.size(), 8);
  out += text;
  out.reserve(out.size() + m.support_vectors.data.size() * 4);
  for (float v : m.support_vectors.data) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  return out;
}

SvmModel deserialize_model(std::string_view bytes) {
  const std::size_t prefix = kMagic.size() + 4 + 8;
  if (bytes.size() < prefix || bytes.substr(0, kMagic.size()) != kMagic)
    throw FormatError("model file: bad magic");
  const auto version = get_le(bytes, kMagic.size(), 4);
  if (version != kModelVersion)
    throw FormatError(fmt::format("model file: version {} not supported (expected {})", version, kModelVersion));
  const auto header_len = get_le(bytes, kMagic.size() + 4, 8);
  if (header_len > bytes.size() - prefix) throw FormatError("model file: truncated header");

  SvmModel m;
  std::size_t dim = 0, n_sv = 0;
  try {
    const auto h = json::parse(bytes.substr(prefix, header_len));
    m.label_order = h.at("label_order").get<std::vector<std::string>>();
    const auto& kernel = h.at("kernel");
    if (kernel.at("type").get<std::string>() != "rbf") throw FormatError("model file: unsupported kernel");
    m.gamma = kernel.at("gamma").get<double>();
    const auto& meta = h.at("meta");
    m.c = meta.at("c").get<double>();
    m.seed = meta.at("seed").get<std::uint64_t>();
    m.calibrated = meta.at("calibrated").get<bool>();
    dim = meta.at("feature_dim").get<std::size_t>();
    n_sv = meta.at("n_sv").get<std::size_t>();
    m.sv_train_index = meta.at("sv_train_index").get<std::vector<std::uint64_t>>();
    for (const auto& jm : h.at("machines")) {
      BinaryMachine mc;
      mc.positive = jm.at("positive").get<std::size_t>();
      mc.negative = jm.at("negative").get<std::size_t>();
      mc.sv = jm.at("sv").get<std::vector<std::uint32_t>>();
      mc.coef = jm.at("coef").get<std::vector<double>>();
      mc.rho = jm.at("rho").get<double>();
      mc.platt = {jm.at("platt").at("a").get<double>(), jm.at("platt").at("b").get<double>()};
      m.machines.push_back(std::move(mc));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: bad header: ") + e.what());
  }

  const std::size_t body = prefix + header_len;
  if (dim == 0) throw FormatError("model file: zero feature dimension");
  const std::size_t expected = n_sv * dim * 4;
  if (bytes.size() - body != expected)
    throw FormatError(fmt::format("model file: support-vector block has {} bytes, expected {}", bytes.size() - body,
                                  expected));
  if (m.sv_train_index.size() != n_sv) throw FormatError("model file: sv_train_index length mismatch");
  for (const auto& mc : m.machines) {
    if (mc.positive >= m.label_order.size() || mc.negative >= m.label_order.size() || mc.positive == mc.negative)
      throw FormatError("model file: machine label out of range");
    if (mc.sv.size() != mc.coef.size()) throw FormatError("model file: sv/coef length mismatch");
    for (auto s : mc.sv)
      if (s >= n_sv) throw FormatError("model file: support-vector index out of range");
    if (!std::isfinite(mc.platt.a) || !std::isfinite(mc.platt.b) || !std::isfinite(mc.rho))
      throw FormatError("model file: non-finite machine parameter");
  }
  m.support_vectors = FeatureMatrix(dim);
  m.support_vectors.rows = n_sv;
  m.support_vectors.data.resize(n_sv * dim);
  for (std::size_t i = 0; i < m.support_vectors.data.size(); ++i)
    m.support_vectors.data[i] = std::bit_cast<float>(std::uint32_t(get_le(bytes, body + 4 * i, 4)));
  m.sv_sqnorm.resize(n_sv);
  for (std::size_t s = 0; s < n_sv; ++s) m.sv_sqnorm[s] = detail::sqnorm(m.support_vectors.row(s));
  return m;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

SvmModel load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace biaskit::svm
