#include "icpflow/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace icpflow {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
public:
  Reader(std::string_view bytes, const char* what) : bytes_(bytes), what_(what) {}

  template <class T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) fail("truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void expect_magic(std::string_view magic) {
    if (bytes_.size() < magic.size() || bytes_.substr(0, magic.size()) != magic) fail("bad magic");
    pos_ = magic.size();
    if (get<std::uint32_t>() != kFormatVersion) fail("unsupported version");
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const char* why) const { throw FormatError(std::string(what_) + ": " + why); }

private:
  std::string_view bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::string encode_vectors(std::string_view magic, const std::vector<Vec3>& v, double timestamp) {
  std::string out(magic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, v.size());
  put<double>(out, timestamp);
  out.reserve(out.size() + v.size() * 12);
  for (const auto& p : v)
    for (int d = 0; d < 3; ++d) put<float>(out, static_cast<float>(p(d)));
  return out;
}

std::vector<Vec3> decode_vectors(std::string_view bytes, std::string_view magic, const char* what,
                                 double& timestamp) {
  Reader r(bytes, what);
  r.expect_magic(magic);
  const auto n = r.get<std::uint64_t>();
  timestamp = r.get<double>();
  if (n > r.remaining() / 12 || r.remaining() != n * 12) r.fail("payload size does not match point count");
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    for (int d = 0; d < 3; ++d) {
      const float f = r.get<float>();
      if (!std::isfinite(f)) r.fail("non-finite coordinate");
      p(d) = f;
    }
  }
  return out;
}

}  // namespace

std::string encode_scan(const PointCloud& scan) { return encode_vectors("ICPF", scan.points, scan.timestamp); }

PointCloud decode_scan(std::string_view bytes) {
  PointCloud pc;
  pc.points = decode_vectors(bytes, "ICPF", "scan file", pc.timestamp);
  return pc;
}

std::string encode_flow(const FlowField& flow, double timestamp) {
  return encode_vectors("ICFF", flow.vectors, timestamp);
}

FlowField decode_flow(std::string_view bytes, double* timestamp) {
  double ts = 0.0;
  FlowField flow{decode_vectors(bytes, "ICFF", "flow file", ts)};
  if (timestamp) *timestamp = ts;
  return flow;
}

std::string encode_labels(const std::vector<char>& fg_mask) {
  std::string out("ICLB");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, fg_mask.size());
  for (char c : fg_mask) out.push_back(c ? '\x01' : '\x00');
  return out;
}

std::vector<char> decode_labels(std::string_view bytes) {
  Reader r(bytes, "label file");
  r.expect_magic("ICLB");
  const auto n = r.get<std::uint64_t>();
  if (r.remaining() != n) r.fail("payload size does not match point count");
  std::vector<char> out(n);
  for (auto& c : out) {
    const auto v = r.get<std::uint8_t>();
    if (v > 1) r.fail("label byte must be 0 or 1");
    c = static_cast<char>(v);
  }
  return out;
}

std::string encode_pose(const RigidTransform& pose) {
  const Eigen::Matrix4d m = pose.matrix();
  std::string out;
  char buf[64];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out += buf;
      out += c == 3 ? '\n' : ' ';
    }
  }
  return out;
}

RigidTransform decode_pose(std::string_view text) {
  std::istringstream is{std::string(text)};
  Eigen::Matrix4d m;
  for (int k = 0; k < 16; ++k) {
    std::string token;
    if (!(is >> token)) throw FormatError("pose file: expected 16 numbers");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v))
      throw FormatError("pose file: bad number '" + token + "'");
    m(k / 4, k % 4) = v;
  }
  std::string extra;
  if (is >> extra) throw FormatError("pose file: more than 16 numbers");
  const Eigen::RowVector4d bottom(0.0, 0.0, 0.0, 1.0);
  if ((m.row(3) - bottom).cwiseAbs().maxCoeff() > 1e-9) throw FormatError("pose file: bottom row must be 0 0 0 1");
  const RigidTransform pose = RigidTransform::from_matrix(m);
  if (!pose.is_valid(1e-6)) throw FormatError("pose file: rotation block is not a proper rotation");
  return pose;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PointCloud read_scan(const std::filesystem::path& path) { return decode_scan(read_file(path)); }
void write_scan(const std::filesystem::path& path, const PointCloud& scan) { write_file(path, encode_scan(scan)); }
FlowField read_flow(const std::filesystem::path& path) { return decode_flow(read_file(path)); }
void write_flow(const std::filesystem::path& path, const FlowField& flow, double timestamp) {
  write_file(path, encode_flow(flow, timestamp));
}
std::vector<char> read_labels(const std::filesystem::path& path) { return decode_labels(read_file(path)); }
void write_labels(const std::filesystem::path& path, const std::vector<char>& fg_mask) {
  write_file(path, encode_labels(fg_mask));
}
RigidTransform read_pose(const std::filesystem::path& path) { return decode_pose(read_file(path)); }
void write_pose(const std::filesystem::path& path, const RigidTransform& pose) { write_file(path, encode_pose(pose)); }

}  // namespace icpflow
