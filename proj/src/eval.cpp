#include "dhash/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dhash {
namespace {

void check_pair(const BinaryCodes& db, const BinaryCodes& queries, const GroundTruth& gt) {
  if (db.bits() != queries.bits()) {
    throw std::invalid_argument("eval: database codes have " + std::to_string(db.bits()) +
                                " bits, queries have " + std::to_string(queries.bits()));
  }
  if (gt.size() != queries.count()) {
    throw std::invalid_argument("eval: ground truth has " + std::to_string(gt.size()) +
                                " entries for " + std::to_string(queries.count()) + " queries");
  }
  std::vector<char> seen(db.count(), 0);
  for (const auto& rel : gt) {
    for (std::size_t idx : rel) {
      if (idx >= db.count()) throw std::invalid_argument("eval: ground-truth index out of range");
      if (seen[idx]) throw std::invalid_argument("eval: duplicate ground-truth index");
      seen[idx] = 1;
    }
    for (std::size_t idx : rel) seen[idx] = 0;
  }
}

std::vector<char> relevance_mask(const std::vector<std::size_t>& rel, std::size_t n) {
  std::vector<char> mask(n, 0);
  for (std::size_t idx : rel) mask[idx] = 1;
  return mask;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

GroundTruth euclidean_knn_gt(const Matrix& database, const Matrix& queries, std::size_t k) {
  if (database.rows() != queries.rows()) {
    throw std::invalid_argument("euclidean_knn_gt: dimensionality mismatch");
  }
  const auto n = static_cast<std::size_t>(database.cols());
  if (k < 1 || k > n) {
    throw std::invalid_argument("euclidean_knn_gt: k = " + std::to_string(k) +
                                " out of range [1, " + std::to_string(n) + "]");
  }
  GroundTruth gt(static_cast<std::size_t>(queries.cols()));
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = {(database.col(static_cast<Eigen::Index>(i)) - queries.col(q)).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    auto& out = gt[static_cast<std::size_t>(q)];
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  }
  return gt;
}

GroundTruth label_gt(const std::vector<int>& db_labels, const std::vector<int>& query_labels) {
  GroundTruth gt(query_labels.size());
  for (std::size_t q = 0; q < query_labels.size(); ++q) {
    for (std::size_t i = 0; i < db_labels.size(); ++i) {
      if (db_labels[i] == query_labels[q]) gt[q].push_back(i);
    }
  }
  return gt;
}

std::vector<std::size_t> hamming_ranking(const BinaryCodes& db, std::span<const std::uint8_t> query) {
  // Counting sort on distance keeps index order within each bucket.
  std::vector<std::vector<std::size_t>> buckets(db.bits() + 1);
  for (std::size_t i = 0; i < db.count(); ++i) {
    buckets[hamming_distance(db.code(i), query, db.bits())].push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(db.count());
  for (const auto& b : buckets) order.insert(order.end(), b.begin(), b.end());
  return order;
}

std::vector<double> average_precisions(const BinaryCodes& db, const BinaryCodes& queries,
                                       const GroundTruth& gt, std::optional<std::size_t> top_k) {
  check_pair(db, queries, gt);
  std::vector<double> ap(queries.count(), 0.0);
  for (std::size_t q = 0; q < queries.count(); ++q) {
    if (gt[q].empty()) continue;
    const std::vector<char> rel = relevance_mask(gt[q], db.count());
    const std::vector<std::size_t> order = hamming_ranking(db, queries.code(q));
    const std::size_t depth = top_k ? std::min(*top_k, order.size()) : order.size();
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < depth; ++k) {
      if (rel[order[k]]) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k + 1);
      }
    }
    ap[q] = sum / static_cast<double>(gt[q].size());
  }
  return ap;
}

double mean_average_precision(const BinaryCodes& db, const BinaryCodes& queries,
                              const GroundTruth& gt, std::optional<std::size_t> top_k) {
  return mean(average_precisions(db, queries, gt, top_k));
}

std::vector<double> precisions_at_radius(const BinaryCodes& db, const BinaryCodes& queries,
                                         const GroundTruth& gt, std::size_t radius) {
  check_pair(db, queries, gt);
  std::vector<double> prec(queries.count(), 0.0);
  for (std::size_t q = 0; q < queries.count(); ++q) {
    const std::vector<char> rel = relevance_mask(gt[q], db.count());
    std::size_t retrieved = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < db.count(); ++i) {
      if (hamming_distance(db.code(i), queries.code(q), db.bits()) <= radius) {
        ++retrieved;
        hits += rel[i] ? 1 : 0;
      }
    }
    if (retrieved > 0) prec[q] = static_cast<double>(hits) / static_cast<double>(retrieved);
  }
  return prec;
}

double precision_at_radius(const BinaryCodes& db, const BinaryCodes& queries,
                           const GroundTruth& gt, std::size_t radius) {
  return mean(precisions_at_radius(db, queries, gt, radius));
}

EvalReport evaluate(const BinaryCodes& db, const BinaryCodes& queries, const GroundTruth& gt,
                    const std::vector<std::size_t>& radii, std::optional<std::size_t> top_k) {
  EvalReport rep;
  rep.top_k = top_k;
  rep.radii = radii;
  rep.per_query_ap = average_precisions(db, queries, gt, top_k);
  rep.map = mean(rep.per_query_ap);
  for (std::size_t r : radii) {
    rep.per_query_precision[r] = precisions_at_radius(db, queries, gt, r);
    rep.precision_at_r[r] = mean(rep.per_query_precision[r]);
  }
  return rep;
}

}  // namespace dhash
