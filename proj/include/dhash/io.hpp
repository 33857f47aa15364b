#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhash/codes.hpp"
#include "dhash/eval.hpp"
#include "dhash/init.hpp"
#include "dhash/network.hpp"

namespace dhash {

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct Dataset {
  Matrix x;  // D x m, one sample per column
  std::optional<std::vector<int>> labels;
};

// A trained network together with the mode it was trained for.
struct Model {
  Mode mode = Mode::unsupervised;
  NetworkParams params;

  friend bool operator==(const Model&, const Model&) = default;
};

// IDX (big-endian): images magic 0x00000803 with dims count, rows, cols;
// labels magic 0x00000801 with dim count. Each image becomes one column of
// rows*cols pixel values in row-major pixel order.
Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels = std::nullopt);
std::vector<int> load_idx_labels(const std::filesystem::path& labels);

// Writers used to build fixtures and export subsets. Pixel values are
// rounded and must lie in [0, 255].
void save_idx_images(const Matrix& x, std::size_t rows, std::size_t cols,
                     const std::filesystem::path& path);
void save_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path);

enum class XvecsElement { float32, uint8 };

// .fvecs / .bvecs: records of a little-endian int32 dimension then the values.
Dataset load_xvecs(const std::filesystem::path& path, XvecsElement element);

// One sample per row, comma separated. A first line that does not parse as
// numbers is treated as a header. With label_column the last column holds an
// integer label.
Dataset load_csv(const std::filesystem::path& path, bool label_column);

// Dispatch on extension: .fvecs, .bvecs, .csv, otherwise IDX.
Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& labels = std::nullopt,
                     bool csv_label_column = false);

// "DHNN" container, version 1, little-endian:
//   magic[4] "DHNN" | u8 version | u8 mode (0 unsup, 1 sup) | u32 n |
//   u32 layer_sizes[n] | u8 activations[n-1] (0 sigmoid, 1 linear) |
//   for l = 1..n-1: f64 W^(l) column-major, f64 c^(l)
inline constexpr std::uint8_t kModelVersion = 1;
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const Model& model);
Model parse_model(std::span<const std::uint8_t> bytes);

// "DHCB" container, version 1: magic[4] | u8 version | u32 L | u64 count |
// packed codes (count * ceil(L/8) bytes).
inline constexpr std::uint8_t kCodesVersion = 1;
void save_codes(const BinaryCodes& codes, const std::filesystem::path& path);
BinaryCodes load_codes(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_codes(const BinaryCodes& codes);
BinaryCodes parse_codes(std::span<const std::uint8_t> bytes);

// Ground truth: u64 query count, then per query u64 length and u64 indices.
void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_ground_truth(const GroundTruth& gt);
GroundTruth parse_ground_truth(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dhash
