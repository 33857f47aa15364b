#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "dhash/codes.hpp"
#include "dhash/numerics.hpp"

namespace dhash {

// Per query, the database indices that count as relevant.
using GroundTruth = std::vector<std::vector<std::size_t>>;

// k nearest database columns per query column by Euclidean distance; ties go
// to the lower database index. Lists are ordered nearest first.
GroundTruth euclidean_knn_gt(const Matrix& database, const Matrix& queries, std::size_t k);

// Every database item whose label equals the query's label.
GroundTruth label_gt(const std::vector<int>& db_labels, const std::vector<int>& query_labels);

// Database indices ordered by Hamming distance to `query`, ties by index.
std::vector<std::size_t> hamming_ranking(const BinaryCodes& db, std::span<const std::uint8_t> query);

// AP per query over the Hamming ranking, truncated to top_k when given.
// AP = sum over relevant positions k of Precision@k, divided by |GT|;
// queries with empty GT score 0.
std::vector<double> average_precisions(const BinaryCodes& db, const BinaryCodes& queries,
                                       const GroundTruth& gt,
                                       std::optional<std::size_t> top_k = std::nullopt);

double mean_average_precision(const BinaryCodes& db, const BinaryCodes& queries,
                              const GroundTruth& gt,
                              std::optional<std::size_t> top_k = std::nullopt);

// Per query: fraction of database items within Hamming radius r that are
// relevant, 0 when nothing lies within r.
std::vector<double> precisions_at_radius(const BinaryCodes& db, const BinaryCodes& queries,
                                         const GroundTruth& gt, std::size_t radius);

double precision_at_radius(const BinaryCodes& db, const BinaryCodes& queries,
                           const GroundTruth& gt, std::size_t radius);

struct EvalReport {
  double map = 0.0;
  std::map<std::size_t, double> precision_at_r;
  std::vector<double> per_query_ap;
  std::map<std::size_t, std::vector<double>> per_query_precision;
  std::optional<std::size_t> top_k;
  std::vector<std::size_t> radii;
};

EvalReport evaluate(const BinaryCodes& db, const BinaryCodes& queries, const GroundTruth& gt,
                    const std::vector<std::size_t>& radii,
                    std::optional<std::size_t> top_k = std::nullopt);

}  // namespace dhash
