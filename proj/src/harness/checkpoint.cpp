#include "clfm/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "clfm/harness/digest.hpp"

namespace clfm::harness {

namespace {

constexpr const char* kMagic = "clfm-checkpoint";

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume little-endian");

}  // namespace

std::string encode_matrix(const ad::Matrix& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * sizeof(double), '\0');
  std::size_t off = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      std::memcpy(bytes.data() + off, &v, sizeof v);
      off += sizeof v;
    }
  }
  return to_hex(bytes);
}

ad::Matrix decode_matrix(const std::string& hex, Eigen::Index rows, Eigen::Index cols) {
  const std::string bytes = from_hex(hex);
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * sizeof(double)) {
    throw DigestError("parameter blob length does not match its shape");
  }
  ad::Matrix m(rows, cols);
  std::size_t off = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v;
      std::memcpy(&v, bytes.data() + off, sizeof v);
      m(i, j) = v;
      off += sizeof v;
    }
  }
  return m;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json doc;
  doc["format"] = ckpt.format;
  doc["code_version"] = ckpt.code_version;
  doc["seed"] = ckpt.seed;
  doc["config_digest"] = ckpt.config_digest;
  doc["architecture"] = ckpt.architecture;
  doc["config"] = ckpt.config;
  doc["extra"] = ckpt.extra;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.parameters) {
    params.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()},
                      {"data", encode_matrix(m)}});
  }
  doc["parameters"] = params;
  const std::string body = doc.dump(1);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << kMagic << ' ' << ckpt.format << '\n' << body << '\n' << "sha256 " << sha256_hex(body)
      << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto first = text.find('\n');
  if (first == std::string::npos || text.rfind(kMagic, 0) != 0) {
    throw DigestError("'" + path + "' is not a checkpoint");
  }
  const int format = std::atoi(text.substr(std::strlen(kMagic) + 1, first).c_str());
  if (format != kCheckpointFormat) {
    throw CheckpointMismatch("checkpoint format " + std::to_string(format) + ", expected " +
                             std::to_string(kCheckpointFormat));
  }
  // Trailer is the last complete line.
  if (text.size() < 2 || text.back() != '\n') throw DigestError("checkpoint truncated");
  const auto trailer_start = text.rfind('\n', text.size() - 2);
  if (trailer_start == std::string::npos || trailer_start < first) {
    throw DigestError("checkpoint truncated");
  }
  const std::string trailer = text.substr(trailer_start + 1, text.size() - trailer_start - 2);
  if (trailer.rfind("sha256 ", 0) != 0) throw DigestError("checkpoint digest line missing");
  const std::string body = text.substr(first + 1, trailer_start - first - 1);
  if (sha256_hex(body) != trailer.substr(7)) throw DigestError("checkpoint digest mismatch");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw DigestError(std::string("checkpoint body unreadable: ") + e.what());
  }
  Checkpoint c;
  c.format = doc.at("format").get<int>();
  c.code_version = doc.at("code_version").get<std::string>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.config_digest = doc.at("config_digest").get<std::string>();
  c.architecture = doc.at("architecture");
  c.config = doc.at("config");
  c.extra = doc.at("extra");
  for (const auto& p : doc.at("parameters")) {
    c.parameters[p.at("name").get<std::string>()] =
        decode_matrix(p.at("data").get<std::string>(), p.at("rows").get<Eigen::Index>(),
                      p.at("cols").get<Eigen::Index>());
  }
  return c;
}

void require_architecture(const Checkpoint& ckpt, const nlohmann::json& expected) {
  if (ckpt.architecture != expected) {
    throw CheckpointMismatch("checkpoint architecture differs: stored " +
                             ckpt.architecture.dump() + ", expected " + expected.dump());
  }
}

void store_parameters(Checkpoint& ckpt, const nets::ParamList& params) {
  for (const auto& p : params) {
    if (!ckpt.parameters.emplace(p.name, p.var.value()).second) {
      throw std::invalid_argument("duplicate parameter name '" + p.name + "'");
    }
  }
}

void restore_parameters(const Checkpoint& ckpt, const nets::ParamList& params) {
  for (const auto& p : params) {
    auto it = ckpt.parameters.find(p.name);
    if (it == ckpt.parameters.end()) {
      throw CheckpointMismatch("checkpoint has no parameter '" + p.name + "'");
    }
    if (it->second.rows() != p.var.rows() || it->second.cols() != p.var.cols()) {
      throw CheckpointMismatch("parameter '" + p.name + "' has a different shape");
    }
    nets::Var v = p.var;
    v.mutable_value() = it->second;
  }
}

}  // namespace clfm::harness
