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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs without network access or optional components.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli.hpp"
#include "generators.hpp"
#include "influx/influx.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace influx::acceptance {
namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fixture(const std::string& name) {
  return std::string(INFLUX_FIXTURES_DIR) + "/" + name;
}

const std::vector<std::string> kFixtureDatasets = {
    "two_instance.jsonl", "question_decides.jsonl", "realization_decides.jsonl",
    "sentiment.jsonl", "synth_seed7.jsonl"};

bool near(const std::optional<double>& a, const std::optional<double>& b,
          double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::fabs(*a - *b) <= tol;
}

std::string describe(const InfluenceReport& r) {
  std::ostringstream os;
  os << "total=" << r.total << " question=" << r.element_question
     << " context=" << r.element_context << " semantic=" << r.semantic
     << " linguistic=" << r.linguistic;
  return os.str();
}

void oracle_equivalence() {
  std::mt19937_64 rng(101);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 50; ++trial) {
    SyntheticSpec spec;
    spec.n_semantic = pick(1, 5);
    spec.n_realizations_per = pick(1, 4);
    spec.n_questions_per = pick(1, 4);
    spec.n_classes = pick(2, 4);
    spec.seed = rng();
    spec.sharpness = std::uniform_real_distribution<double>(0.25, 4.0)(rng);
    const Dataset ds = generate_synthetic(spec);
    const auto a = influence_report(ds);
    const auto b = exact_influence(ds);
    const double tol = 1e-9;
    const bool ok = std::fabs(a.total - b.total) <= tol &&
                    std::fabs(a.element_question - b.element_question) <= tol &&
                    std::fabs(a.element_context - b.element_context) <= tol &&
                    std::fabs(a.semantic - b.semantic) <= tol &&
                    std::fabs(a.linguistic - b.linguistic) <= tol &&
                    near(a.relative_question, b.relative_question, tol) &&
                    near(a.relative_context, b.relative_context, tol) &&
                    near(a.relative_semantic, b.relative_semantic, tol) &&
                    near(a.relative_linguistic, b.relative_linguistic, tol);
    require(ok, "spec " + std::to_string(trial) + ": " + describe(a) +
                    " vs oracle " + describe(b));
  }
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  require(seconds < 10.0, "runtime " + std::to_string(seconds) + " s");
}

void check_closure(const InfluenceReport& r, const std::string& label) {
  require(std::fabs(r.element_context + r.element_question - r.total) <= 1e-12,
          label + ": question + context != total: " + describe(r));
  require(std::fabs(r.semantic + r.linguistic - r.element_context) <= 1e-12,
          label + ": semantic + linguistic != context: " + describe(r));
  for (double v : {r.total, r.element_question, r.element_context, r.semantic,
                   r.linguistic}) {
    require(v >= -1e-12, label + ": negative value: " + describe(r));
  }
}

void closure_and_nonnegativity() {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 1000; ++trial) {
    check_closure(influence_report(testing::random_dataset(rng)),
                  "random dataset " + std::to_string(trial));
  }
  for (std::size_t trial = 0; trial < 100; ++trial) {
    const SyntheticSpec spec{1 + trial % 6, 1 + trial % 5, 1 + trial % 4,
                             2 + trial % 5, trial, 0.5 + 0.1 * trial};
    check_closure(influence_report(generate_synthetic(spec)),
                  "synthetic dataset " + std::to_string(trial));
  }
  for (const auto& name : kFixtureDatasets) {
    check_closure(influence_report(load_dataset(fixture(name))), name);
  }
}

void structural_zeros() {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    const auto label = std::to_string(trial);
    require(influence_report(testing::random_dataset(rng, {1, 4, 4, 4}))
                    .semantic <= 1e-12,
            "single instance with nonzero semantic influence, trial " + label);
    require(influence_report(testing::random_dataset(rng, {5, 1, 4, 4}))
                    .linguistic <= 1e-12,
            "single realization with nonzero linguistic influence, trial " +
                label);
    require(influence_report(testing::random_dataset(rng, {5, 4, 1, 4}))
                    .element_question <= 1e-12,
            "single question with nonzero question influence, trial " + label);
  }
}

void ratio_fixtures() {
  struct Row {
    double numerator, denominator, percent;
  };
  for (const Row& row : {Row{0.116, 0.212, 54.7}, Row{0.211, 0.290, 72.7},
                         Row{0.325, 0.361, 90.0}}) {
    const double pct = 100.0 * relative_influence(row.numerator, row.denominator);
    require(std::fabs(pct - row.percent) <= 0.1,
            format_number(row.numerator) + "/" + format_number(row.denominator) +
                " gave " + format_number(pct) + "%");
  }
}

void calibration() {
  const std::vector<LogitRecord> three = {
      {"a", {2, 0}, 0}, {"b", {1, 0}, 1}, {"c", {3, 0}, 0}};
  const auto fit = calibrate(three);
  require(std::fabs(fit.temperature.value() - 2.83) <= 0.01,
          "fitted T = " + format_number(fit.temperature.value()));
  require(std::fabs(mean_max_probability(three, fit.temperature) - fit.accuracy) <=
              1e-6,
          "post-fit calibration gap above 1e-6");

  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> log_t(std::log(1e-3), std::log(1e3));
  for (int trial = 0; trial < 1000; ++trial) {
    const auto records = testing::random_records(rng);
    const Temperature t(std::exp(log_t(rng)));
    std::size_t correct = 0;
    for (const auto& r : records) {
      const std::size_t predicted = argmax(apply_temperature(r, t).probs());
      require(predicted == argmax(r.logits),
              "argmax changed at T = " + format_number(t.value()));
      correct += predicted == r.label;
    }
    require(static_cast<double>(correct) / static_cast<double>(records.size()) ==
                accuracy(records),
            "accuracy changed at T = " + format_number(t.value()));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = testing::random_records(rng);
    double previous = 2.0;
    for (int i = 0; i < 20; ++i) {
      const double t =
          std::min(1e3, std::exp(std::log(1e-3) + i * (std::log(1e6) / 19.0)));
      const double m = mean_max_probability(records, Temperature(t));
      require(m <= previous + 1e-15, "mean max probability increased at T = " +
                                         format_number(t));
      previous = m;
    }
  }
}

void fres() {
  const double cat = fres_score("The cat sat.").score;
  const double dog = fres_score("The happy dog runs quickly.").score;
  require(std::fabs(cat - 119.190) <= 1e-9, "cat example gave " + format_number(cat));
  require(std::fabs(dog - 83.320) <= 1e-9, "dog example gave " + format_number(dog));

  std::mt19937_64 rng(105);
  for (int trial = 0; trial < 500; ++trial) {
    const std::string s = testing::random_text(rng).render();
    require(std::fabs(fres_score(s).score - fres_score(s + " " + s).score) <= 1e-9,
            "replication changed the score of: " + s);
  }
  for (int trial = 0; trial < 500; ++trial) {
    auto t = testing::random_text(rng);
    const std::size_t i =
        std::uniform_int_distribution<std::size_t>(0, t.words.size() - 1)(rng);
    const std::size_t before = count_syllables(t.words[i]);
    if (before >= 4) continue;
    const auto base = fres_score(t.render());
    const auto& group = testing::kWordsBySyllables[before + 1];
    t.words[i] =
        group[std::uniform_int_distribution<std::size_t>(0, group.size() - 1)(rng)];
    require(fres_score(t.render()).score < base.score,
            "longer word did not lower the score of: " + t.render());
  }
  for (int trial = 0; trial < 500; ++trial) {
    auto t = testing::random_text(rng);
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i + 1 < t.words.size(); ++i) {
      if (t.sentence_end[i]) inner.push_back(i);
    }
    if (inner.empty()) continue;
    const auto base = fres_score(t.render());
    t.sentence_end[inner[std::uniform_int_distribution<std::size_t>(
        0, inner.size() - 1)(rng)]] = false;
    require(fres_score(t.render()).score < base.score,
            "merging sentences did not lower the score of: " + t.render());
  }
}

void question_filter() {
  require(is_linguistic_question("What does the underlined word in paragraph 2 mean?"),
          "underlined-word question kept");
  require(!is_linguistic_question("Why did Tom go to the market?"),
          "content question removed");
  require(is_linguistic_question(
              "What does the second sentence in paragraph 1 refer to?"),
          "second-sentence question kept");

  std::mt19937_64 rng(106);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> qs(
        std::uniform_int_distribution<std::size_t>(0, 30)(rng));
    for (auto& q : qs) q = testing::random_question(rng);
    const auto first = filter_questions(qs);
    std::vector<std::string> kept;
    for (std::size_t i : first.kept) kept.push_back(qs[i]);
    require(filter_questions(kept).removed.empty(), "filter is not idempotent");
  }
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string q = testing::random_question(rng);
    std::string upper, mixed;
    for (char c : q) {
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      upper += u;
      mixed += std::bernoulli_distribution(0.5)(rng) ? u : c;
    }
    require(is_linguistic_question(q) == is_linguistic_question(upper) &&
                is_linguistic_question(q) == is_linguistic_question(mixed),
            "case changed the decision for: " + q);
  }
}

void concordance() {
  std::mt19937_64 rng(107);
  std::vector<double> fractions;
  for (int i = 1; i <= 10; ++i) fractions.push_back(i / 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto items = testing::random_concordance_items(rng);
    for (double gap : {0.0, 25.0, 50.0}) {
      const auto curve = concordance_curve(items, gap, fractions);
      for (std::size_t f = 0; f < fractions.size(); ++f) {
        const auto expected =
            testing::brute_force_concordance(items, gap, fractions[f]);
        const auto& got = curve.points[f];
        require(got.n_pairs == expected.n_pairs && got.agreement == expected.agreement,
                "item set " + std::to_string(trial) + ", gap " + format_number(gap) +
                    ", fraction " + format_number(fractions[f]));
      }
    }
  }
}

std::string run_cli_or_fail(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  std::string joined;
  for (const auto& a : args) joined += " " + a;
  require(code == cli::kExitOk, "influx" + joined + " exited " +
                                    std::to_string(code) + ": " + err.str());
  return out.str();
}

void determinism() {
  const std::string seed7 = fixture("synth_seed7.jsonl");
  const std::vector<std::vector<std::string>> commands = {
      {"influence", "--in", seed7},
      {"influence", "--in", seed7, "--unit", "bits", "--table"},
      {"oracle", "--in", seed7},
      {"agreement", "--in", seed7, "--min-gap", "0"},
      {"agreement", "--in", seed7, "--min-gap", "25", "--csv"},
      {"sweep", "--in", seed7, "--order-by", fixture("synth_seed7.order.csv"),
       "--baseline-seed", "3"},
      {"sweep", "--in", seed7, "--order-by", fixture("synth_seed7.order.csv"),
       "--value", "total", "--csv"},
      {"synth", "--spec",
       R"({"n_semantic": 4, "n_realizations_per": 3, "n_questions_per": 3, "n_classes": 4, "seed": 7})"},
      {"calibrate", "--in", fixture("logits.jsonl")},
      {"readability", "--in", fixture("texts.txt")},
      {"filter-questions", "--in", fixture("questions.txt")},
      {"diversity", "--in", fixture("embeddings.jsonl")},
  };
  for (const auto& command : commands) {
    std::string reference;
    for (const char* threads : {"1", "4", "8"}) {
      std::vector<std::string> args = {"--threads", threads};
      args.insert(args.end(), command.begin(), command.end());
      const std::string out = run_cli_or_fail(args);
      if (reference.empty()) {
        reference = out;
        require(!out.empty(), command.front() + " printed nothing");
      } else {
        require(out == reference, command.front() + " output differs with " +
                                      threads + " threads");
      }
    }
  }
}

void sweep_full_fraction() {
  std::mt19937_64 rng(110);
  const std::vector<double> fractions = {1.0};
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset ds = testing::random_dataset(rng, {10, 4, 4, 4});
    std::map<std::string, double, std::less<>> scores;
    std::normal_distribution<double> g;
    for (const auto& inst : ds.instances) scores[inst.instance_id] = g(rng);
    const auto report = influence_report(ds);
    for (auto v : {SweepValue::kRelativeQuestion, SweepValue::kRelativeContext,
                   SweepValue::kRelativeSemantic, SweepValue::kTotal}) {
      const auto got = influence_sweep(ds, scores, fractions, v).points.front().value;
      require(near(got, sweep_value(report, v), 1e-12),
              "dataset " + std::to_string(trial) + " differs from full report");
    }
  }
}

struct Criterion {
  const char* name;
  std::function<void()> check;
};

}  // namespace
}  // namespace influx::acceptance

int main() {
  using namespace influx::acceptance;
  const std::vector<Criterion> criteria = {
      {"oracle equivalence on 50 synthetic specs", oracle_equivalence},
      {"chain-rule closure and nonnegativity", closure_and_nonnegativity},
      {"structural zeros", structural_zeros},
      {"relative-ratio fixtures", ratio_fixtures},
      {"temperature calibration", calibration},
      {"readability fixtures and properties", fres},
      {"question filter", question_filter},
      {"concordance curve vs brute force", concordance},
      {"CLI determinism across thread counts", determinism},
      {"influence sweep at full fraction", sweep_full_fraction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = true;
    try {
      criteria[i].check();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("[%s] AC%zu %s%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, ok ? "" : ": ", detail.c_str());
    failures += !ok;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
