#pragma once

#include "icpflow/flow.hpp"
#include "icpflow/geometry.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icpflow {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Binary layouts, all little-endian:
//   scan  "ICPF" u32 version=1, u64 N, f64 timestamp, N x 3 f32 (x, y, z)
//   flow  "ICFF" u32 version=1, u64 N, f64 timestamp, N x 3 f32 (dx, dy, dz)
//   label "ICLB" u32 version=1, u64 N, N x u8 (0 background, 1 foreground)
// Pose files are UTF-8 text: 16 numbers, row-major 4x4 sensor-to-world.

inline constexpr std::uint32_t kFormatVersion = 1;

std::string encode_scan(const PointCloud& scan);
PointCloud decode_scan(std::string_view bytes);

/// `timestamp` is carried in the header; readers ignore it beyond round-tripping.
std::string encode_flow(const FlowField& flow, double timestamp = 0.0);
FlowField decode_flow(std::string_view bytes, double* timestamp = nullptr);

std::string encode_labels(const std::vector<char>& fg_mask);
std::vector<char> decode_labels(std::string_view bytes);

std::string encode_pose(const RigidTransform& pose);
/// @throws FormatError unless 16 numbers with bottom row 0 0 0 1 (within 1e-9).
RigidTransform decode_pose(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

PointCloud read_scan(const std::filesystem::path& path);
void write_scan(const std::filesystem::path& path, const PointCloud& scan);
FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow, double timestamp = 0.0);
std::vector<char> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<char>& fg_mask);
RigidTransform read_pose(const std::filesystem::path& path);
void write_pose(const std::filesystem::path& path, const RigidTransform& pose);

}  // namespace icpflow
