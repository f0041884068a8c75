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

// Entropy and the plug-in decomposition of input influence.
//
// With uniform averages over instances i, realizations r and questions q:
//   H_total    = mean_i mean_{r,q} H(P(y|q,r))
//   H_context  = mean_i mean_r     H(mean_q P(y|q,r))
//   H_semantic = mean_i            H(mean_{r,q} P(y|q,r))
//   total   = H(p̄) - H_total       context  = H(p̄) - H_context
//   question = total - context      semantic = H(p̄) - H_semantic
//   linguistic = context - semantic
// All values are in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "influx/dataset.hpp"
#include "influx/error.hpp"
#include "influx/numeric.hpp"

namespace influx {

// Values in [-kNegativeSlack, 0) are rounding noise and reported as 0.
inline constexpr double kNegativeSlack = 1e-12;

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double entropy(const Distribution& d) { return entropy(d.probs()); }

inline Distribution mean_distribution(std::span<const Distribution> ds) {
  if (ds.empty()) throw ValidationError("mean of an empty distribution list");
  const std::size_t k = ds.front().num_classes();
  std::vector<double> mean(k);
  for (std::size_t c = 0; c < k; ++c) {
    CompensatedSum acc;
    for (const auto& d : ds) {
      if (d.num_classes() != k) {
        throw ValidationError("inconsistent number of classes");
      }
      acc.add(d[c]);
    }
    mean[c] = acc.value() / static_cast<double>(ds.size());
  }
  return validate_distribution(mean);
}

inline double relative_influence(double numerator, double denominator) {
  if (!(denominator > 0.0)) {
    throw ValidationError("degenerate influence denominator");
  }
  return numerator / denominator;
}

struct InfluenceReport {
  double total = 0.0;
  double element_question = 0.0;
  double element_context = 0.0;  // text influence for single-element tasks
  double semantic = 0.0;
  double linguistic = 0.0;
  // Ratios are empty when their denominator is zero.
  std::optional<double> relative_question;    // question / total
  std::optional<double> relative_context;     // context / total
  std::optional<double> relative_semantic;    // semantic / context
  std::optional<double> relative_linguistic;  // linguistic / context
};

namespace detail {

inline double clamp_gap(double value, const char* name) {
  if (value < -kNegativeSlack) {
    throw ConsistencyError(std::string("negative ") + name +
                           " influence: " + format_number(value));
  }
  return value < 0.0 ? 0.0 : value + 0.0;
}

inline std::optional<double> ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

}  // namespace detail

// Assembles a report from the five influence values: clamps rounding noise
// below zero and fills in the ratios.
inline InfluenceReport make_report(double total, double question,
                                   double context, double semantic,
                                   double linguistic) {
  InfluenceReport r;
  r.total = detail::clamp_gap(total, "total");
  r.element_question = detail::clamp_gap(question, "question");
  r.element_context = detail::clamp_gap(context, "context");
  r.semantic = detail::clamp_gap(semantic, "semantic");
  r.linguistic = detail::clamp_gap(linguistic, "linguistic");
  r.relative_question = detail::ratio(r.element_question, r.total);
  r.relative_context = detail::ratio(r.element_context, r.total);
  r.relative_semantic = detail::ratio(r.semantic, r.element_context);
  r.relative_linguistic = detail::ratio(r.linguistic, r.element_context);
  return r;
}

namespace detail {

struct InstanceTerms {
  std::vector<double> mean;  // mean over the realization x question grid
  double h_cells = 0.0;
  double h_context = 0.0;
  double h_semantic = 0.0;
};

// Visits realizations and questions in id order so results do not depend on
// their listing order.
inline InstanceTerms instance_terms(const Instance& inst, std::size_t k) {
  std::vector<std::size_t> r_order(inst.realizations.size());
  std::iota(r_order.begin(), r_order.end(), 0);
  std::sort(r_order.begin(), r_order.end(), [&](std::size_t a, std::size_t b) {
    return inst.realizations[a].id < inst.realizations[b].id;
  });
  std::vector<std::size_t> q_order(inst.question_slots());
  std::iota(q_order.begin(), q_order.end(), 0);
  if (!inst.questions.empty()) {
    std::sort(q_order.begin(), q_order.end(), [&](std::size_t a, std::size_t b) {
      return inst.questions[a].id < inst.questions[b].id;
    });
  }

  const double n_r = static_cast<double>(r_order.size());
  const double n_q = static_cast<double>(q_order.size());
  std::vector<CompensatedSum> grid_sum(k);
  CompensatedSum h_cells, h_context;
  std::vector<double> question_mean(k);
  for (std::size_t r : r_order) {
    std::vector<CompensatedSum> q_sum(k);
    for (std::size_t q : q_order) {
      const Distribution& d = inst.cell(r, q);
      h_cells.add(entropy(d));
      for (std::size_t c = 0; c < k; ++c) q_sum[c].add(d[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      question_mean[c] = q_sum[c].value() / n_q;
      grid_sum[c].add(question_mean[c]);
    }
    h_context.add(entropy(question_mean));
  }

  InstanceTerms t;
  t.mean.resize(k);
  for (std::size_t c = 0; c < k; ++c) t.mean[c] = grid_sum[c].value() / n_r;
  t.h_cells = h_cells.value() / (n_r * n_q);
  t.h_context = h_context.value() / n_r;
  t.h_semantic = entropy(t.mean);
  return t;
}

}  // namespace detail

// Influence decomposition over the instances at `indices`. Per-instance terms may be
// computed on `threads` workers; the reduction runs in instance_id order, so
// the report is bit-identical for any thread count and instance order.
inline InfluenceReport influence_report(const Dataset& ds,
                                        std::span<const std::size_t> indices,
                                        unsigned threads = 1) {
  if (indices.empty()) throw ValidationError("influence over an empty subset");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.instances[a].instance_id < ds.instances[b].instance_id;
  });

  const std::size_t k = ds.num_classes;
  std::vector<detail::InstanceTerms> terms(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    terms[i] = detail::instance_terms(ds.instances[order[i]], k);
  });

  const double n_s = static_cast<double>(order.size());
  std::vector<CompensatedSum> mean_sum(k);
  CompensatedSum h_cells, h_context, h_semantic;
  for (const auto& t : terms) {
    for (std::size_t c = 0; c < k; ++c) mean_sum[c].add(t.mean[c]);
    h_cells.add(t.h_cells);
    h_context.add(t.h_context);
    h_semantic.add(t.h_semantic);
  }
  std::vector<double> marginal(k);
  for (std::size_t c = 0; c < k; ++c) marginal[c] = mean_sum[c].value() / n_s;
  const double h_marginal = entropy(marginal);

  const double total = h_marginal - h_cells.value() / n_s;
  const double context = h_marginal - h_context.value() / n_s;
  const double semantic = h_marginal - h_semantic.value() / n_s;
  return make_report(total, total - context, context, semantic,
                     context - semantic);
}

inline InfluenceReport influence_report(const Dataset& ds, unsigned threads = 1) {
  std::vector<std::size_t> all(ds.instances.size());
  std::iota(all.begin(), all.end(), 0);
  return influence_report(ds, all, threads);
}

enum class Unit { kNats, kBits };

inline double to_unit(double nats, Unit unit) {
  return unit == Unit::kBits ? nats / std::log(2.0) : nats;
}

inline std::string_view unit_name(Unit unit) {
  return unit == Unit::kBits ? "bits" : "nats";
}

// {"total", "question", "context", "semantic", "linguistic", "relative", "unit"}
inline nlohmann::ordered_json report_to_json(const InfluenceReport& r,
                                             Unit unit = Unit::kNats) {
  nlohmann::ordered_json j;
  j["total"] = to_unit(r.total, unit);
  j["question"] = to_unit(r.element_question, unit);
  j["context"] = to_unit(r.element_context, unit);
  j["semantic"] = to_unit(r.semantic, unit);
  j["linguistic"] = to_unit(r.linguistic, unit);
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json rel;
  rel["question"] = opt(r.relative_question);
  rel["context"] = opt(r.relative_context);
  rel["semantic"] = opt(r.relative_semantic);
  rel["linguistic"] = opt(r.relative_linguistic);
  j["relative"] = std::move(rel);
  j["unit"] = unit_name(unit);
  return j;
}

// Aligned text table: total, then question and context with their share of
// total, then the semantic/linguistic split of context.
inline std::string report_to_table(const InfluenceReport& r,
                                   Unit unit = Unit::kNats) {
  auto cell = [&](double v, const std::optional<double>& rel) {
    std::string s = format_number(to_unit(v, unit));
    if (rel) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(1) << (*rel * 100.0);
      s += " (" + os.str() + "%)";
    }
    return s;
  };
  const std::vector<std::string> header = {
      "total", "question", "context", "context-semantic", "context-linguistic"};
  const std::vector<std::string> row = {
      format_number(to_unit(r.total, unit)),
      cell(r.element_question, r.relative_question),
      cell(r.element_context, r.relative_context),
      cell(r.semantic, r.relative_semantic),
      cell(r.linguistic, r.relative_linguistic)};
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i + 1 == cells.size()) {
        os << cells[i];
        break;
      }
      const std::size_t width = std::max(header[i].size(), row[i].size()) + 2;
      os << std::left << std::setw(static_cast<int>(width)) << cells[i];
    }
    os << '\n';
  };
  line(header);
  line(row);
  os << "(" << unit_name(unit) << ")\n";
  return os.str();
}

}  // namespace influx
