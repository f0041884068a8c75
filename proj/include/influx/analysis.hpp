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

// Derived analyses: normalized ranks, entropy-filtered readability/probability
// concordance curves, and influence sweeps over ranked instance subsets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "influx/dataset.hpp"
#include "influx/error.hpp"
#include "influx/info_metrics.hpp"
#include "influx/numeric.hpp"

namespace influx {

// Ascending ranks 1..n (ties share the mean of their rank range), divided by n.
inline std::vector<double> normalized_ranks(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j averaged.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      ranks[order[t]] = mean_rank / static_cast<double>(n);
    }
    i = j;
  }
  return ranks;
}

inline void validate_fractions(std::span<const double> fractions) {
  if (fractions.empty()) throw ValidationError("no fractions given");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw ValidationError("fraction " + format_number(fractions[i]) +
                            " outside (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw ValidationError("fractions must be strictly increasing");
    }
  }
}

// One (question, realization) cell seen by the concordance analysis.
struct ConcordanceItem {
  std::string instance_id;
  std::string question_id;
  std::string realization_id;
  double readability = 0.0;
  double true_class_prob = 0.0;
  double entropy = 0.0;  // of the cell's output distribution
};

struct ConcordancePoint {
  double retain_fraction = 0.0;
  std::optional<double> agreement;  // empty when no pair qualifies
  std::size_t n_pairs = 0;
};

struct ConcordanceCurve {
  std::vector<ConcordancePoint> points;
};

// Items for every cell whose realization has a readability score and whose
// question (or, for single-element tasks, instance) has a true class.
inline std::vector<ConcordanceItem> concordance_items(const Dataset& ds) {
  std::vector<ConcordanceItem> items;
  for (const Instance& inst : ds.instances) {
    for (std::size_t q = 0; q < inst.question_slots(); ++q) {
      const auto true_class = inst.true_class_for(q);
      if (!true_class) continue;
      const std::string qid = inst.questions.empty()
                                  ? std::string(kSingleElementQuestionId)
                                  : inst.questions[q].id;
      for (std::size_t r = 0; r < inst.realizations.size(); ++r) {
        const auto& real = inst.realizations[r];
        if (!real.readability) continue;
        const Distribution& d = inst.cell(r, q);
        items.push_back({inst.instance_id, qid, real.id, *real.readability,
                         d[*true_class], entropy(d)});
      }
    }
  }
  return items;
}

// For each retain fraction f, keeps the ceil(f * N) lowest-entropy items
// (stable on ties) and scores every pair sharing (instance, question) whose
// readability gap is at least `min_gap`: 1 when readability and probability
// order agree, 0.5 when the probabilities are equal, 0 otherwise.
inline ConcordanceCurve concordance_curve(std::span<const ConcordanceItem> items,
                                          double min_gap,
                                          std::span<const double> fractions) {
  if (!(min_gap >= 0.0)) throw ValidationError("min_gap must be >= 0");
  validate_fractions(fractions);
  std::vector<std::size_t> by_entropy(items.size());
  std::iota(by_entropy.begin(), by_entropy.end(), 0);
  std::stable_sort(by_entropy.begin(), by_entropy.end(),
                   [&](std::size_t a, std::size_t b) {
                     return items[a].entropy < items[b].entropy;
                   });

  ConcordanceCurve curve;
  for (double f : fractions) {
    const std::size_t keep = retained_count(f, items.size());
    std::map<std::pair<std::string_view, std::string_view>, std::vector<std::size_t>>
        groups;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& it = items[by_entropy[i]];
      groups[{it.instance_id, it.question_id}].push_back(by_entropy[i]);
    }
    std::size_t pairs = 0;
    std::size_t half_units = 0;  // 2 per concordant pair, 1 per probability tie
    for (const auto& [key, members] : groups) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          const auto& x = items[members[a]];
          const auto& y = items[members[b]];
          const double dr = x.readability - y.readability;
          if (!(std::abs(dr) >= min_gap)) continue;
          ++pairs;
          const double dp = x.true_class_prob - y.true_class_prob;
          if (dp == 0.0) {
            half_units += 1;
          } else if ((dr > 0.0) == (dp > 0.0) && dr != 0.0) {
            half_units += 2;
          }
        }
      }
    }
    ConcordancePoint p;
    p.retain_fraction = f;
    p.n_pairs = pairs;
    if (pairs > 0) {
      p.agreement = static_cast<double>(half_units) / (2.0 * static_cast<double>(pairs));
    }
    curve.points.push_back(p);
  }
  return curve;
}

enum class SweepValue { kRelativeQuestion, kRelativeContext, kRelativeSemantic, kTotal };

inline std::optional<double> sweep_value(const InfluenceReport& r, SweepValue v) {
  switch (v) {
    case SweepValue::kRelativeQuestion: return r.relative_question;
    case SweepValue::kRelativeContext: return r.relative_context;
    case SweepValue::kRelativeSemantic: return r.relative_semantic;
    case SweepValue::kTotal: return r.total;
  }
  return std::nullopt;
}

struct SweepPoint {
  double fraction = 0.0;
  std::optional<double> value;  // empty when a ratio's denominator is zero
  std::size_t n_contexts = 0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  // Same sweep over a seeded uniform-random instance ordering.
  std::optional<std::vector<SweepPoint>> baseline;
};

namespace detail {

inline std::vector<SweepPoint> sweep_over(const Dataset& ds,
                                          std::span<const std::size_t> order,
                                          std::span<const double> fractions,
                                          SweepValue value, unsigned threads) {
  std::vector<SweepPoint> points;
  for (double f : fractions) {
    const std::size_t n = retained_count(f, order.size());
    if (n < 1) throw ValidationError("sweep subset is empty at fraction " + format_number(f));
    const auto report = influence_report(ds, order.first(n), threads);
    points.push_back({f, sweep_value(report, value), n});
  }
  return points;
}

}  // namespace detail

// Ranks instances by descending score (ties by instance_id) and reports the
// requested influence value on the top ceil(f * n_s) instances for each f.
inline SweepCurve influence_sweep(const Dataset& ds,
                                  const std::map<std::string, double, std::less<>>& scores,
                                  std::span<const double> fractions, SweepValue value,
                                  std::optional<std::uint64_t> baseline_seed = std::nullopt,
                                  unsigned threads = 1) {
  validate_fractions(fractions);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(ds.instances.size());
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto it = scores.find(ds.instances[i].instance_id);
    if (it == scores.end()) {
      throw ValidationError("missing score for instance '" +
                            ds.instances[i].instance_id + "'");
    }
    if (!std::isfinite(it->second)) {
      throw ValidationError("non-finite score for instance '" + it->first + "'");
    }
    keyed.emplace_back(it->second, i);
  }
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return ds.instances[a.second].instance_id < ds.instances[b.second].instance_id;
  });
  std::vector<std::size_t> order;
  order.reserve(keyed.size());
  for (const auto& k : keyed) order.push_back(k.second);

  SweepCurve curve;
  curve.points = detail::sweep_over(ds, order, fractions, value, threads);
  if (baseline_seed) {
    std::vector<std::size_t> random_order(ds.instances.size());
    std::iota(random_order.begin(), random_order.end(), 0);
    std::sort(random_order.begin(), random_order.end(), [&](std::size_t a, std::size_t b) {
      return ds.instances[a].instance_id < ds.instances[b].instance_id;
    });
    std::mt19937_64 rng(*baseline_seed);
    std::shuffle(random_order.begin(), random_order.end(), rng);
    curve.baseline = detail::sweep_over(ds, random_order, fractions, value, threads);
  }
  return curve;
}

// "instance_id,score" lines; a first line whose score does not parse is
// treated as a header.
inline std::map<std::string, double, std::less<>> parse_scores(
    std::istream& in, std::string_view source = "<input>") {
  std::map<std::string, double, std::less<>> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.rfind(',');
    auto fail = [&](const std::string& msg) {
      return ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                             ": " + msg);
    };
    if (comma == std::string::npos) throw fail("expected instance_id,score");
    const std::string id = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(value, &used);
      if (value.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(value);
      }
    } catch (const std::exception&) {
      if (line_no == 1 && scores.empty()) continue;
      throw fail("invalid score '" + value + "'");
    }
    if (!scores.emplace(id, score).second) throw fail("duplicate instance_id '" + id + "'");
  }
  return scores;
}

}  // namespace influx
