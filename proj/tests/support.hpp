#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <iomanip>
#include <random>
#include <sstream>
#include <vector>

#include "dhash/codes.hpp"
#include "dhash/eval.hpp"
#include "dhash/init.hpp"
#include "dhash/io.hpp"
#include "dhash/numerics.hpp"

namespace dhash::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Matrix random_signs(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = coin(rng) ? 1.0 : -1.0;
  return m;
}

inline Matrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.transpose());
}

struct ClusterData {
  Matrix x;
  std::vector<int> labels;
};

// Isotropic Gaussian clusters: centers ~ N(0, spread^2 I), points ~ N(center, I).
// Samples are interleaved (sample i belongs to cluster i % clusters).
inline ClusterData gaussian_clusters(Eigen::Index dim, Eigen::Index count, int clusters,
                                     double spread, std::uint64_t seed,
                                     const Matrix* centers_in = nullptr) {
  std::mt19937_64 rng(seed);
  Matrix centers = centers_in ? *centers_in : random_matrix(dim, clusters, rng, spread);
  std::normal_distribution<double> normal(0.0, 1.0);
  ClusterData out;
  out.x.resize(dim, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const int c = static_cast<int>(j % clusters);
    out.labels.push_back(c);
    for (Eigen::Index i = 0; i < dim; ++i) out.x(i, j) = centers(i, c) + normal(rng);
  }
  return out;
}

inline Matrix cluster_centers(Eigen::Index dim, int clusters, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_matrix(dim, clusters, rng, spread);
}

// Random model with 3 to 5 layers; unsupervised models end in D.
inline Model random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> layers(3, 5);
  std::uniform_int_distribution<Eigen::Index> width(1, 9);
  std::bernoulli_distribution coin(0.5);
  Model m;
  m.mode = coin(rng) ? Mode::unsupervised : Mode::supervised;
  const int n = layers(rng);
  std::vector<Eigen::Index> sizes;
  std::vector<Activation> acts;
  for (int i = 0; i < n; ++i) sizes.push_back(width(rng));
  if (m.mode == Mode::unsupervised) sizes.back() = sizes.front();
  for (int i = 1; i < n; ++i) acts.push_back(coin(rng) ? Activation::sigmoid : Activation::linear);
  m.params = random_network(sizes, acts, 3.0, rng());
  return m;
}

inline BinaryCodes random_codes(std::mt19937_64& rng) {
  std::uniform_int_distribution<Eigen::Index> bits(1, 70);
  std::uniform_int_distribution<Eigen::Index> count(0, 30);
  return BinaryCodes::from_signs(random_signs(bits(rng), count(rng), rng));
}

inline GroundTruth random_ground_truth(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> count(0, 12);
  std::uniform_int_distribution<std::uint64_t> index;
  GroundTruth gt(count(rng));
  for (auto& rel : gt) {
    rel.resize(count(rng));
    for (auto& i : rel) i = static_cast<std::size_t>(index(rng));
  }
  return gt;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dhash-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// One sample per row with full round-trip precision, optional trailing label.
inline void write_csv(const std::filesystem::path& path, const Matrix& x,
                      const std::vector<int>* labels = nullptr) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) os << (i ? "," : "") << x(i, j);
    if (labels) os << "," << (*labels)[static_cast<std::size_t>(j)];
    os << "\n";
  }
  write_text(path, os.str());
}

}  // namespace dhash::testing
