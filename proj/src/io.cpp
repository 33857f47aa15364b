#include "dhash/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dhash {
namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) {
      throw FormatError(what_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos_) + ", " + std::to_string(remaining()) + " left)");
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint32_t u32_be() {
    auto b = take(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  std::uint32_t u32_le() {
    auto b = take(4);
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
  }

  std::uint64_t u64_le() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }

  double f64_le() { return std::bit_cast<double>(u64_le()); }
  float f32_le() { return std::bit_cast<float>(u32_le()); }

  void expect_end() const {
    if (remaining() != 0) {
      throw FormatError(what_ + ": " + std::to_string(remaining()) + " trailing bytes");
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32_be(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u32_le(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64_le(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64_le(double v) { u64_le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void magic(const char (&m)[5]) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(m[i]));
  }
  std::vector<std::uint8_t> finish() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

void expect_magic(ByteReader& r, const char (&m)[5], const std::string& what) {
  auto b = r.take(4);
  if (std::memcmp(b.data(), m, 4) != 0) {
    throw FormatError(what + ": bad magic (expected \"" + std::string(m) + "\")");
  }
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) end = line.size();
    std::string_view cell(line.data() + start, end - start);
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) return false;
    out.push_back(v);
    start = end + 1;
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("failed to read " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

std::vector<int> load_idx_labels(const std::filesystem::path& labels) {
  const auto bytes = read_file(labels);
  ByteReader r(bytes, labels.string());
  if (r.u32_be() != kIdxLabelsMagic) throw FormatError(labels.string() + ": bad IDX label magic");
  const std::uint32_t count = r.u32_be();
  auto payload = r.take(count);
  r.expect_end();
  return std::vector<int>(payload.begin(), payload.end());
}

Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels) {
  const auto bytes = read_file(images);
  ByteReader r(bytes, images.string());
  if (r.u32_be() != kIdxImagesMagic) throw FormatError(images.string() + ": bad IDX image magic");
  const std::uint32_t count = r.u32_be();
  const std::uint32_t rows = r.u32_be();
  const std::uint32_t cols = r.u32_be();
  const std::size_t dim = std::size_t{rows} * cols;
  auto payload = r.take(std::size_t{count} * dim);
  r.expect_end();

  Dataset ds;
  ds.x.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < payload.size(); ++i) ds.x.data()[i] = payload[i];
  if (labels) {
    ds.labels = load_idx_labels(*labels);
    if (ds.labels->size() != count) {
      throw FormatError("IDX: " + std::to_string(count) + " images but " +
                        std::to_string(ds.labels->size()) + " labels");
    }
  }
  return ds;
}

void save_idx_images(const Matrix& x, std::size_t rows, std::size_t cols,
                     const std::filesystem::path& path) {
  if (static_cast<std::size_t>(x.rows()) != rows * cols) {
    throw std::invalid_argument("save_idx_images: rows * cols must equal the sample dimension");
  }
  ByteWriter w;
  w.u32_be(kIdxImagesMagic);
  w.u32_be(static_cast<std::uint32_t>(x.cols()));
  w.u32_be(static_cast<std::uint32_t>(rows));
  w.u32_be(static_cast<std::uint32_t>(cols));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::round(x.data()[i]);
    if (!(v >= 0.0 && v <= 255.0)) throw std::invalid_argument("save_idx_images: value out of [0,255]");
    w.u8(static_cast<std::uint8_t>(v));
  }
  write_file(path, w.finish());
}

void save_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  ByteWriter w;
  w.u32_be(kIdxLabelsMagic);
  w.u32_be(static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw std::invalid_argument("save_idx_labels: label out of [0,255]");
    w.u8(static_cast<std::uint8_t>(l));
  }
  write_file(path, w.finish());
}

Dataset load_xvecs(const std::filesystem::path& path, XvecsElement element) {
  const auto bytes = read_file(path);
  ByteReader r(bytes, path.string());
  const std::size_t esize = element == XvecsElement::float32 ? 4 : 1;
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t count = 0;
  while (r.remaining() > 0) {
    const auto d = static_cast<std::int32_t>(r.u32_le());
    if (d <= 0) {
      throw FormatError(path.string() + ": record " + std::to_string(count) + " has dimension " +
                        std::to_string(d));
    }
    if (count == 0) {
      dim = static_cast<std::size_t>(d);
    } else if (static_cast<std::size_t>(d) != dim) {
      throw FormatError(path.string() + ": record " + std::to_string(count) + " has dimension " +
                        std::to_string(d) + ", expected " + std::to_string(dim));
    }
    if (r.remaining() < dim * esize) {
      throw FormatError(path.string() + ": truncated record " + std::to_string(count));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      values.push_back(element == XvecsElement::float32 ? static_cast<double>(r.f32_le())
                                                      : static_cast<double>(r.u8()));
    }
    ++count;
  }
  Dataset ds;
  ds.x = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(dim),
                                  static_cast<Eigen::Index>(count));
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, bool label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": not a numeric row");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(row);
  }
  Dataset ds;
  if (rows.empty()) return ds;
  const std::size_t width = rows.front().size();
  if (label_column && width < 2) throw FormatError(path.string() + ": no feature columns");
  const std::size_t dim = label_column ? width - 1 : width;
  ds.x.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
  if (label_column) ds.labels.emplace();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < dim; ++i) {
      ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
    if (label_column) {
      const double l = rows[j].back();
      if (l != std::floor(l)) throw FormatError(path.string() + ": non-integer label");
      ds.labels->push_back(static_cast<int>(l));
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& labels, bool csv_label_column) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("data file " + path.string() + " does not exist");
  }
  const std::string ext = lower_ext(path);
  Dataset ds;
  if (ext == ".fvecs") {
    ds = load_xvecs(path, XvecsElement::float32);
  } else if (ext == ".bvecs") {
    ds = load_xvecs(path, XvecsElement::uint8);
  } else if (ext == ".csv") {
    ds = load_csv(path, csv_label_column);
  } else {
    return load_idx(path, labels);
  }
  if (labels) {
    ds.labels = load_idx_labels(*labels);
    if (ds.labels->size() != static_cast<std::size_t>(ds.x.cols())) {
      throw FormatError("label count does not match sample count");
    }
  }
  return ds;
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
  const NetworkParams& p = model.params;
  p.validate();
  ByteWriter w;
  w.magic("DHNN");
  w.u8(kModelVersion);
  w.u8(model.mode == Mode::unsupervised ? 0 : 1);
  w.u32_le(static_cast<std::uint32_t>(p.num_layers()));
  for (Eigen::Index s : p.layer_sizes) w.u32_le(static_cast<std::uint32_t>(s));
  for (Activation a : p.activations) w.u8(a == Activation::sigmoid ? 0 : 1);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) w.f64_le(p.weights[l].data()[i]);
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) w.f64_le(p.biases[l](i));
  }
  return w.finish();
}

Model parse_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model");
  expect_magic(r, "DHNN", "model");
  const std::uint8_t version = r.u8();
  if (version != kModelVersion) {
    throw FormatError("model: unsupported version " + std::to_string(version));
  }
  Model m;
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError("model: bad mode byte " + std::to_string(mode));
  m.mode = mode == 0 ? Mode::unsupervised : Mode::supervised;
  const std::uint32_t n = r.u32_le();
  if (n < 2 || n > 1024) throw FormatError("model: implausible layer count " + std::to_string(n));
  std::vector<Eigen::Index> sizes;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t s = r.u32_le();
    if (s == 0) throw FormatError("model: zero-sized layer");
    sizes.push_back(static_cast<Eigen::Index>(s));
  }
  std::vector<Activation> acts;
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    const std::uint8_t a = r.u8();
    if (a > 1) throw FormatError("model: bad activation tag " + std::to_string(a));
    acts.push_back(a == 0 ? Activation::sigmoid : Activation::linear);
  }
  // Check the payload length before allocating anything.
  std::size_t expected = 0;
  for (std::uint32_t l = 0; l + 1 < n; ++l) {
    expected += (static_cast<std::size_t>(sizes[l + 1]) * static_cast<std::size_t>(sizes[l]) +
                 static_cast<std::size_t>(sizes[l + 1])) * 8;
  }
  if (r.remaining() != expected) {
    throw FormatError("model: payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(expected));
  }
  m.params = NetworkParams::zeros(std::move(sizes), std::move(acts));
  for (std::size_t l = 0; l < m.params.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < m.params.weights[l].size(); ++i) m.params.weights[l].data()[i] = r.f64_le();
    for (Eigen::Index i = 0; i < m.params.biases[l].size(); ++i) m.params.biases[l](i) = r.f64_le();
  }
  r.expect_end();
  if (m.mode == Mode::unsupervised &&
      (n < 3 || m.params.layer_sizes.back() != m.params.layer_sizes.front())) {
    throw FormatError("model: unsupervised model must map D -> ... -> L -> D");
  }
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_model(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> serialize_codes(const BinaryCodes& codes) {
  ByteWriter w;
  w.magic("DHCB");
  w.u8(kCodesVersion);
  w.u32_le(static_cast<std::uint32_t>(codes.bits()));
  w.u64_le(codes.count());
  w.bytes(codes.packed());
  return w.finish();
}

BinaryCodes parse_codes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "codes");
  expect_magic(r, "DHCB", "codes");
  const std::uint8_t version = r.u8();
  if (version != kCodesVersion) {
    throw FormatError("codes: unsupported version " + std::to_string(version));
  }
  const std::uint32_t bits = r.u32_le();
  if (bits == 0) throw FormatError("codes: code length must be positive");
  const std::uint64_t count = r.u64_le();
  const std::size_t per = (std::size_t{bits} + 7) / 8;
  if (count > r.remaining() / per || count * per != r.remaining()) {
    throw FormatError("codes: payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(count * per));
  }
  auto payload = r.take(static_cast<std::size_t>(count) * per);
  std::vector<std::uint8_t> packed(payload.begin(), payload.end());
  try {
    return BinaryCodes(bits, static_cast<std::size_t>(count), std::move(packed));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("codes: ") + e.what());
  }
}

void save_codes(const BinaryCodes& codes, const std::filesystem::path& path) {
  write_file(path, serialize_codes(codes));
}

BinaryCodes load_codes(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_codes(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> serialize_ground_truth(const GroundTruth& gt) {
  ByteWriter w;
  w.u64_le(gt.size());
  for (const auto& rel : gt) {
    w.u64_le(rel.size());
    for (std::size_t idx : rel) w.u64_le(idx);
  }
  return w.finish();
}

GroundTruth parse_ground_truth(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "ground truth");
  const std::uint64_t count = r.u64_le();
  if (count > r.remaining() / 8) throw FormatError("ground truth: truncated");
  GroundTruth gt(static_cast<std::size_t>(count));
  for (auto& rel : gt) {
    const std::uint64_t len = r.u64_le();
    if (len > r.remaining() / 8) throw FormatError("ground truth: truncated");
    rel.resize(static_cast<std::size_t>(len));
    for (auto& idx : rel) idx = static_cast<std::size_t>(r.u64_le());
  }
  r.expect_end();
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  write_file(path, serialize_ground_truth(gt));
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_ground_truth(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dhash
