/*
 * Copyright 2026 The Influx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Embedding diversity: mean cosine distance to a centroid, either over the
// whole corpus (semantic) or within each instance's realizations and then
// averaged across instances (linguistic).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "influx/dataset.hpp"
#include "influx/error.hpp"
#include "influx/numeric.hpp"
#include "json.hpp"

namespace influx {

struct EmbeddingRecord {
  std::string id;
  std::string instance_id;
  std::vector<double> vector;
};

struct DiversityResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t n = 0;
};

namespace detail {

inline double norm(std::span<const double> v) {
  CompensatedSum acc;
  for (double x : v) acc.add(x * x);
  return std::sqrt(acc.value());
}

}  // namespace detail

// 1 - cos(a, b), in [0, 2].
inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dimension mismatch");
  const double na = detail::norm(a);
  const double nb = detail::norm(b);
  if (na == 0.0 || nb == 0.0) throw ValidationError("zero-norm vector");
  CompensatedSum dot;
  for (std::size_t i = 0; i < a.size(); ++i) dot.add(a[i] * b[i]);
  const double cos = std::clamp(dot.value() / (na * nb), -1.0, 1.0);
  return 1.0 - cos;
}

namespace detail {

inline DiversityResult describe(std::span<const double> values) {
  DiversityResult r;
  r.n = values.size();
  const double n = static_cast<double>(values.size());
  r.mean = compensated_sum(values) / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - r.mean) * (v - r.mean));
  r.std = values.size() > 1 ? std::sqrt(sq.value() / n) : 0.0;
  return r;
}

inline std::vector<double> centroid(std::span<const EmbeddingRecord* const> group) {
  const std::size_t dim = group.front()->vector.size();
  std::vector<double> c(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    CompensatedSum acc;
    for (const auto* r : group) acc.add(r->vector[d]);
    c[d] = acc.value() / static_cast<double>(group.size());
  }
  return c;
}

inline void check_records(std::span<const EmbeddingRecord> records) {
  if (records.empty()) throw ValidationError("no embedding records");
  const std::size_t dim = records.front().vector.size();
  for (const auto& r : records) {
    if (r.vector.size() != dim) {
      throw ValidationError("record '" + r.id + "': dimension mismatch");
    }
    if (norm(r.vector) == 0.0) {
      throw ValidationError("record '" + r.id + "': zero-norm vector");
    }
  }
}

// Records sorted by (instance_id, id) so reductions ignore input order.
inline std::vector<const EmbeddingRecord*> sorted_records(
    std::span<const EmbeddingRecord> records) {
  std::vector<const EmbeddingRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::tie(a->instance_id, a->id) < std::tie(b->instance_id, b->id);
  });
  return out;
}

inline std::vector<double> distances_to_centroid(
    std::span<const EmbeddingRecord* const> group, const char* what) {
  const auto c = centroid(group);
  if (norm(c) == 0.0) throw ValidationError(std::string("zero-norm ") + what);
  std::vector<double> out;
  out.reserve(group.size());
  for (const auto* r : group) out.push_back(cosine_distance(r->vector, c));
  return out;
}

}  // namespace detail

inline DiversityResult semantic_diversity(std::span<const EmbeddingRecord> records) {
  detail::check_records(records);
  const auto sorted = detail::sorted_records(records);
  return detail::describe(detail::distances_to_centroid(sorted, "centroid"));
}

inline DiversityResult linguistic_diversity(std::span<const EmbeddingRecord> records) {
  detail::check_records(records);
  const auto sorted = detail::sorted_records(records);
  std::vector<double> per_instance;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j]->instance_id == sorted[i]->instance_id) ++j;
    const std::span<const EmbeddingRecord* const> group(sorted.data() + i, j - i);
    const auto d = detail::distances_to_centroid(group, "per-instance centroid");
    per_instance.push_back(compensated_sum(d) / static_cast<double>(d.size()));
    i = j;
  }
  return detail::describe(per_instance);
}

// Embeddings JSONL: {"id": "...", "instance_id": "...", "vector": [...]}
inline std::vector<EmbeddingRecord> parse_embeddings(std::istream& in,
                                                     std::string_view source = "<input>") {
  std::vector<EmbeddingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = detail::Json::parse(line);
      if (!obj.is_object()) throw ValidationError("record must be a JSON object");
      EmbeddingRecord r;
      r.id = detail::required_string(obj, "id");
      r.instance_id = detail::required_string(obj, "instance_id");
      r.vector = detail::number_array(detail::required(obj, "vector"), "vector");
      if (r.vector.empty()) throw ValidationError("empty vector");
      out.push_back(std::move(r));
    } catch (const detail::Json::parse_error& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  try {
    detail::check_records(out);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
  return out;
}

inline std::vector<EmbeddingRecord> load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return parse_embeddings(in, path);
}

}  // namespace influx
