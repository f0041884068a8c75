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

// Synthetic hierarchical datasets (semantic unit -> realizations, questions ->
// output distribution) and an exact enumeration of their influence values.
//
// Every cell distribution is
//   P(y | q, r) ∝ (m_{i,q}(y) * d_{i,r}(y)) ^ sharpness
// where m_{i,q} (instance/question mean) and d_{i,r} (realization
// perturbation) are Dirichlet(1) vectors. Randomness is a hash of
// (seed, stream, indices), so each draw is independent of iteration order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "influx/dataset.hpp"
#include "influx/error.hpp"
#include "influx/info_metrics.hpp"

namespace influx {

struct SyntheticSpec {
  std::size_t n_semantic = 1;
  std::size_t n_realizations_per = 1;
  std::size_t n_questions_per = 1;
  std::size_t n_classes = 2;
  std::uint64_t seed = 0;
  double sharpness = 1.0;
};

inline void validate_synthetic_spec(const SyntheticSpec& s) {
  if (s.n_semantic < 1 || s.n_realizations_per < 1 || s.n_questions_per < 1) {
    throw ValidationError("synthetic spec counts must be >= 1");
  }
  if (s.n_classes < 2) throw ValidationError("synthetic spec needs n_classes >= 2");
  if (!(s.sharpness > 0.0) || !std::isfinite(s.sharpness)) {
    throw ValidationError("synthetic spec sharpness must be positive and finite");
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  kQuestionMean = 1,
  kRealizationShift = 2,
  kReadability = 3,
  kTrueClass = 4,
};

// Uniform double in (0, 1) keyed by (seed, stream, a, b, c).
inline double keyed_uniform(std::uint64_t seed, Stream stream, std::uint64_t a,
                            std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Normalized Gamma(1) draws, i.e. a Dirichlet(1, ..., 1) vector.
inline std::vector<double> keyed_dirichlet(std::uint64_t seed, Stream stream,
                                           std::uint64_t a, std::uint64_t b,
                                           std::size_t k) {
  std::vector<double> g(k);
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    g[c] = -std::log1p(-keyed_uniform(seed, stream, a, b, c));
    sum += g[c];
  }
  for (double& x : g) x /= sum;
  return g;
}

inline std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, i);
  return buf;
}

}  // namespace detail

// Pure function of `spec`. n_questions_per == 1 yields a single-element
// dataset (no questions, sentinel cell key).
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  validate_synthetic_spec(spec);
  const std::size_t k = spec.n_classes;
  const bool single = spec.n_questions_per == 1;

  Dataset ds;
  ds.task = single ? Task::kSingleElement : Task::kMultiElement;
  ds.num_classes = k;
  for (std::size_t i = 0; i < spec.n_semantic; ++i) {
    Instance inst;
    inst.instance_id = detail::numbered('s', i);
    for (std::size_t r = 0; r < spec.n_realizations_per; ++r) {
      const double u = detail::keyed_uniform(spec.seed, detail::Stream::kReadability, i, r);
      inst.realizations.push_back({detail::numbered('r', r), 100.0 * u, std::nullopt});
    }
    auto draw_class = [&](std::size_t q) {
      const double u = detail::keyed_uniform(spec.seed, detail::Stream::kTrueClass, i, q);
      return std::min(k - 1, static_cast<std::size_t>(u * static_cast<double>(k)));
    };
    if (single) {
      inst.true_class = draw_class(0);
    } else {
      for (std::size_t q = 0; q < spec.n_questions_per; ++q) {
        inst.questions.push_back({detail::numbered('q', q), std::nullopt, draw_class(q)});
      }
    }

    std::vector<std::vector<double>> shifts;
    for (std::size_t r = 0; r < spec.n_realizations_per; ++r) {
      shifts.push_back(detail::keyed_dirichlet(
          spec.seed, detail::Stream::kRealizationShift, i, r, k));
    }
    for (std::size_t r = 0; r < spec.n_realizations_per; ++r) {
      for (std::size_t q = 0; q < spec.n_questions_per; ++q) {
        const auto mean = detail::keyed_dirichlet(
            spec.seed, detail::Stream::kQuestionMean, i, q, k);
        std::vector<double> score(k);
        double top = -INFINITY;
        for (std::size_t c = 0; c < k; ++c) {
          score[c] = spec.sharpness * (std::log(mean[c]) + std::log(shifts[r][c]));
          top = std::max(top, score[c]);
        }
        double z = 0.0;
        for (double& s : score) {
          s = std::exp(s - top);
          z += s;
        }
        for (double& s : score) s /= z;
        inst.cells.push_back(validate_distribution(score));
      }
    }
    ds.instances.push_back(std::move(inst));
  }
  validate_dataset(ds);
  return ds;
}

inline constexpr std::size_t kMaxEnumerableCells = 1'000'000;

namespace detail {

using Wide = long double;

// KL(p || q) in nats; q > 0 wherever p > 0.
inline Wide kl_divergence(const std::vector<Wide>& p, const std::vector<Wide>& q) {
  Wide d = 0.0L;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0L) d += p[k] * std::log(p[k] / q[k]);
  }
  return d;
}

}  // namespace detail

// Every influence term as an exact expectation over the finite uniform
// support, each written as a weighted KL divergence:
//   I(Y; X) = E_x KL(P(y|x) || P(y)),  I(Y; X | Z) = E_{x,z} KL(P(y|x,z) || P(y|z)).
// Accumulates in long double. Independent of influence_report's
// entropy-difference route.
inline InfluenceReport exact_influence(const Dataset& ds,
                                       std::size_t max_cells = kMaxEnumerableCells) {
  std::size_t n_cells = 0;
  for (const auto& inst : ds.instances) n_cells += inst.cells.size();
  if (n_cells > max_cells) {
    throw ValidationError("support too large to enumerate: " +
                          std::to_string(n_cells) + " cells");
  }
  using detail::Wide;
  const std::size_t k = ds.num_classes;
  const Wide w_s = 1.0L / static_cast<Wide>(ds.instances.size());

  // Conditionals at every level of the hierarchy.
  std::vector<std::vector<Wide>> p_s;                // P(y | s)
  std::vector<std::vector<std::vector<Wide>>> p_sr;  // P(y | s, r)
  std::vector<Wide> p_y(k, 0.0L);
  for (const auto& inst : ds.instances) {
    const Wide w_r = 1.0L / static_cast<Wide>(inst.realizations.size());
    const Wide w_q = 1.0L / static_cast<Wide>(inst.question_slots());
    std::vector<Wide> s_mean(k, 0.0L);
    std::vector<std::vector<Wide>> r_means;
    for (std::size_t r = 0; r < inst.realizations.size(); ++r) {
      std::vector<Wide> r_mean(k, 0.0L);
      for (std::size_t q = 0; q < inst.question_slots(); ++q) {
        for (std::size_t c = 0; c < k; ++c) r_mean[c] += w_q * inst.cell(r, q)[c];
      }
      for (std::size_t c = 0; c < k; ++c) s_mean[c] += w_r * r_mean[c];
      r_means.push_back(std::move(r_mean));
    }
    for (std::size_t c = 0; c < k; ++c) p_y[c] += w_s * s_mean[c];
    p_s.push_back(std::move(s_mean));
    p_sr.push_back(std::move(r_means));
  }

  Wide total = 0.0L, question = 0.0L, context = 0.0L, semantic = 0.0L,
       linguistic = 0.0L;
  std::vector<Wide> cell(k);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& inst = ds.instances[i];
    const Wide w_r = 1.0L / static_cast<Wide>(inst.realizations.size());
    const Wide w_q = 1.0L / static_cast<Wide>(inst.question_slots());
    semantic += w_s * detail::kl_divergence(p_s[i], p_y);
    for (std::size_t r = 0; r < inst.realizations.size(); ++r) {
      context += w_s * w_r * detail::kl_divergence(p_sr[i][r], p_y);
      linguistic += w_s * w_r * detail::kl_divergence(p_sr[i][r], p_s[i]);
      for (std::size_t q = 0; q < inst.question_slots(); ++q) {
        for (std::size_t c = 0; c < k; ++c) cell[c] = inst.cell(r, q)[c];
        total += w_s * w_r * w_q * detail::kl_divergence(cell, p_y);
        question += w_s * w_r * w_q * detail::kl_divergence(cell, p_sr[i][r]);
      }
    }
  }
  return make_report(static_cast<double>(total), static_cast<double>(question),
                     static_cast<double>(context), static_cast<double>(semantic),
                     static_cast<double>(linguistic));
}

}  // namespace influx
