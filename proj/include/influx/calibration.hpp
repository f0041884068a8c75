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

// Single-parameter temperature calibration: logits are divided by T before
// the softmax, with T chosen so that the mean maximum probability equals the
// accuracy. Dividing by T > 0 never changes the predicted class.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "influx/dataset.hpp"
#include "influx/error.hpp"
#include "influx/numeric.hpp"
#include "json.hpp"

namespace influx {

struct LogitRecord {
  std::string id;
  std::vector<double> logits;
  std::size_t label = 0;
};

class Temperature {
 public:
  static constexpr double kMin = 1e-3;
  static constexpr double kMax = 1e3;

  explicit Temperature(double t) : t_(t) {
    if (!(t >= kMin && t <= kMax)) {
      throw ValidationError("temperature " + format_number(t) + " outside [" +
                            format_number(kMin) + ", " + format_number(kMax) +
                            "]");
    }
  }
  double value() const { return t_; }

 private:
  double t_;
};

inline void validate_logit_record(const LogitRecord& r) {
  if (r.logits.size() < 2) {
    throw ValidationError("record '" + r.id + "': need at least 2 logits");
  }
  for (double s : r.logits) {
    if (!std::isfinite(s)) {
      throw ValidationError("record '" + r.id + "': non-finite logit");
    }
  }
  if (r.label >= r.logits.size()) {
    throw ValidationError("record '" + r.id + "': label out of range");
  }
}

// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline Distribution apply_temperature(const LogitRecord& r, Temperature t) {
  const double top = r.logits[argmax(r.logits)];
  std::vector<double> p(r.logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp((r.logits[k] - top) / t.value());
    z += p[k];
  }
  for (double& x : p) x /= z;
  return validate_distribution(p);
}

inline double accuracy(std::span<const LogitRecord> records) {
  if (records.empty()) throw ValidationError("no logit records");
  std::size_t correct = 0;
  for (const auto& r : records) correct += argmax(r.logits) == r.label;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

// Mean over records of max_k softmax(logits / t)_k.
inline double mean_max_probability(std::span<const LogitRecord> records,
                                   Temperature t) {
  if (records.empty()) throw ValidationError("no logit records");
  CompensatedSum acc;
  for (const auto& r : records) {
    const double top = r.logits[argmax(r.logits)];
    double z = 0.0;
    for (double s : r.logits) z += std::exp((s - top) / t.value());
    acc.add(1.0 / z);
  }
  return acc.value() / static_cast<double>(records.size());
}

struct CalibrationResult {
  Temperature temperature{1.0};
  double accuracy = 0.0;
  double mean_max_before = 0.0;  // at T = 1
  double mean_max_after = 0.0;
  int iterations = 0;
};

inline constexpr double kCalibrationTolerance = 1e-6;
inline constexpr int kCalibrationMaxIterations = 200;

// Bisection on ln T over [ln 1e-3, ln 1e3]. The first probe is T = 1.
inline CalibrationResult calibrate(std::span<const LogitRecord> records) {
  if (records.empty()) throw ValidationError("no logit records");
  const std::size_t k = records.front().logits.size();
  for (const auto& r : records) {
    validate_logit_record(r);
    if (r.logits.size() != k) {
      throw ValidationError("record '" + r.id + "': inconsistent number of classes");
    }
  }

  CalibrationResult result;
  result.accuracy = accuracy(records);
  result.mean_max_before = mean_max_probability(records, Temperature(1.0));
  auto gap_at = [&](double log_t) {
    return mean_max_probability(records, Temperature(std::exp(log_t))) -
           result.accuracy;
  };

  const double log_max = std::log(Temperature::kMax);
  double lo = -log_max;  // sharpest: largest mean max probability
  double hi = log_max;
  const double gap_lo = gap_at(lo);
  const double gap_hi = gap_at(hi);
  if (gap_lo < -kCalibrationTolerance || gap_hi > kCalibrationTolerance) {
    throw ValidationError(
        "calibration target unattainable: accuracy " +
        format_number(result.accuracy) + " outside attainable mean max "
        "probability range [" + format_number(gap_hi + result.accuracy) + ", " +
        format_number(gap_lo + result.accuracy) + "]");
  }

  for (int it = 1; it <= kCalibrationMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gap = gap_at(mid);
    if (std::abs(gap) <= kCalibrationTolerance) {
      result.temperature = Temperature(std::exp(mid));
      result.mean_max_after = gap + result.accuracy;
      result.iterations = it;
      return result;
    }
    // Too confident: soften with a larger temperature.
    if (gap > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(gap_lo) <= kCalibrationTolerance) {
    result.temperature = Temperature(Temperature::kMin);
  } else if (std::abs(gap_hi) <= kCalibrationTolerance) {
    result.temperature = Temperature(Temperature::kMax);
  } else {
    throw ConsistencyError("temperature bisection did not converge");
  }
  result.mean_max_after = mean_max_probability(records, result.temperature);
  result.iterations = kCalibrationMaxIterations;
  return result;
}

inline Temperature fit_temperature(std::span<const LogitRecord> records) {
  return calibrate(records).temperature;
}

// Logits JSONL: {"id": "...", "logits": [...], "label": 2}
inline std::vector<LogitRecord> parse_logits(std::istream& in,
                                             std::string_view source = "<input>") {
  std::vector<LogitRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = detail::Json::parse(line);
      if (!obj.is_object()) throw ValidationError("record must be a JSON object");
      LogitRecord r;
      r.id = detail::required_string(obj, "id");
      r.logits = detail::number_array(detail::required(obj, "logits"), "logits");
      const auto label = detail::optional_class(obj, "label");
      if (!label) throw ValidationError("missing field \"label\"");
      r.label = *label;
      validate_logit_record(r);
      out.push_back(std::move(r));
    } catch (const detail::Json::parse_error& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  if (out.empty()) throw ValidationError(std::string(source) + ": no logit records");
  return out;
}

inline std::vector<LogitRecord> load_logits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return parse_logits(in, path);
}

}  // namespace influx
