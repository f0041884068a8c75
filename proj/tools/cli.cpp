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

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "influx/influx.hpp"
#include "json.hpp"

namespace influx::cli {
namespace {

using OJson = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Six significant digits everywhere a number is displayed.
std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

void write_json(const OJson& j, std::ostream& os, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case OJson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << inner << OJson(key).dump() << ": ";
        write_json(value, os, indent + 1);
      }
      os << '\n' << pad << '}';
      break;
    }
    case OJson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) os << ",\n";
        first = false;
        os << inner;
        write_json(value, os, indent + 1);
      }
      os << '\n' << pad << ']';
      break;
    }
    case OJson::value_t::number_float:
      os << num(j.get<double>());
      break;
    default:
      os << j.dump();
  }
}

void emit_json(const OJson& j, std::ostream& os) {
  write_json(j, os);
  os << '\n';
}

std::optional<Task> parse_task(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "rc" || s == "mcrc" || s == "multi_element") return Task::kMultiElement;
  return Task::kSingleElement;
}

// "start:stop:step" or a comma-separated list.
std::vector<double> parse_fractions(const std::string& spec) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("invalid --fractions value '" + spec + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("--fractions expects start:stop:step");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw UsageError("invalid --fractions range '" + spec + "'");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      const double x = start + static_cast<double>(i) * step;
      out.push_back(std::round(x * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

struct Options {
  unsigned threads = 1;
  std::string out_path;
  std::string in_path;
  std::string task;
  std::string unit = "nats";
  bool table = false;
  bool csv = false;
  bool dataset_input = false;
  std::string semantic_in;
  double min_gap = 0.0;
  std::string fractions = "0.1:1.0:0.1";
  std::string order_by;
  std::string value = "relative_question";
  std::optional<std::uint64_t> baseline_seed;
  std::string spec_json;
};

void cmd_influence(const Options& o, std::ostream& out, bool exact) {
  const Dataset ds = load_dataset(o.in_path, parse_task(o.task));
  const InfluenceReport r = exact ? exact_influence(ds) : influence_report(ds, o.threads);
  const Unit unit = o.unit == "bits" ? Unit::kBits : Unit::kNats;
  if (o.table) {
    // Table cells are already formatted to six significant digits.
    out << report_to_table(r, unit);
  } else {
    emit_json(report_to_json(r, unit), out);
  }
}

void cmd_calibrate(const Options& o, std::ostream& out) {
  const auto records = load_logits(o.in_path);
  const CalibrationResult c = calibrate(records);
  OJson j;
  j["temperature"] = c.temperature.value();
  j["accuracy"] = c.accuracy;
  j["mean_max_prob_before"] = c.mean_max_before;
  j["mean_max_prob_after"] = c.mean_max_after;
  j["n"] = records.size();
  emit_json(j, out);
}

void cmd_readability(const Options& o, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> texts;
  if (o.dataset_input) {
    const Dataset ds = load_dataset(o.in_path, parse_task(o.task));
    for (const auto& inst : ds.instances) {
      for (const auto& r : inst.realizations) {
        if (r.text) texts.emplace_back(inst.instance_id + "/" + r.id, *r.text);
      }
    }
  } else {
    const auto lines = read_lines(o.in_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!blank(lines[i])) texts.emplace_back(std::to_string(i + 1), lines[i]);
    }
  }
  std::ostringstream body;
  body << "id,score,n_words,n_sentences,n_syllables\n";
  for (const auto& [id, text] : texts) {
    ReadabilityBreakdown b;
    try {
      b = fres_score(text);
    } catch (const ValidationError& e) {
      throw ValidationError(o.in_path + ": " + id + ": " + e.what());
    }
    body << id << ',' << num(b.score) << ',' << b.n_words << ',' << b.n_sentences
         << ',' << b.n_syllables << '\n';
  }
  out << body.str();
}

void cmd_filter_questions(const Options& o, std::ostream& out) {
  std::vector<std::string> labels;
  std::vector<std::string> texts;
  if (o.dataset_input) {
    const Dataset ds = load_dataset(o.in_path, parse_task(o.task));
    for (const auto& inst : ds.instances) {
      for (const auto& q : inst.questions) {
        if (!q.text) continue;
        labels.push_back(inst.instance_id + "/" + q.id);
        texts.push_back(*q.text);
      }
    }
  } else {
    for (auto& line : read_lines(o.in_path)) {
      if (blank(line)) continue;
      labels.push_back(line);
      texts.push_back(std::move(line));
    }
  }
  const auto r = filter_questions(texts);
  OJson j;
  j["kept"] = OJson::array();
  for (std::size_t i : r.kept) j["kept"].push_back(labels[i]);
  j["removed"] = OJson::array();
  for (std::size_t i : r.removed) j["removed"].push_back(labels[i]);
  j["n"] = texts.size();
  j["removed_fraction"] = r.removed_fraction;
  emit_json(j, out);
}

void cmd_diversity(const Options& o, std::ostream& out) {
  const auto records = load_embeddings(o.in_path);
  const auto semantic = o.semantic_in.empty()
                            ? semantic_diversity(records)
                            : semantic_diversity(load_embeddings(o.semantic_in));
  const auto linguistic = linguistic_diversity(records);
  out << "metric,mean,std,n\n";
  out << "semantic," << num(semantic.mean) << ',' << num(semantic.std) << ','
      << semantic.n << '\n';
  out << "linguistic," << num(linguistic.mean) << ',' << num(linguistic.std) << ','
      << linguistic.n << '\n';
}

void cmd_agreement(const Options& o, std::ostream& out) {
  if (!(o.min_gap >= 0.0)) throw UsageError("--min-gap must be >= 0");
  const Dataset ds = load_dataset(o.in_path, parse_task(o.task));
  const auto fractions = parse_fractions(o.fractions);
  const auto items = concordance_items(ds);
  const auto curve = concordance_curve(items, o.min_gap, fractions);
  if (o.csv) {
    out << "fraction,value,n\n";
    for (const auto& p : curve.points) {
      out << num(p.retain_fraction) << ',' << opt_num(p.agreement) << ','
          << p.n_pairs << '\n';
    }
    return;
  }
  OJson j;
  j["min_gap"] = o.min_gap;
  j["n_items"] = items.size();
  j["points"] = OJson::array();
  for (const auto& p : curve.points) {
    OJson jp;
    jp["fraction"] = p.retain_fraction;
    jp["agreement"] = p.agreement ? OJson(*p.agreement) : OJson(nullptr);
    jp["n_pairs"] = p.n_pairs;
    j["points"].push_back(std::move(jp));
  }
  emit_json(j, out);
}

SweepValue parse_sweep_value(const std::string& s) {
  if (s == "relative_question") return SweepValue::kRelativeQuestion;
  if (s == "relative_context") return SweepValue::kRelativeContext;
  if (s == "relative_semantic") return SweepValue::kRelativeSemantic;
  return SweepValue::kTotal;
}

void cmd_sweep(const Options& o, std::ostream& out) {
  const Dataset ds = load_dataset(o.in_path, parse_task(o.task));
  std::ifstream scores_in(o.order_by);
  if (!scores_in) throw ValidationError("cannot open " + o.order_by);
  const auto scores = parse_scores(scores_in, o.order_by);
  const auto fractions = parse_fractions(o.fractions);
  const auto curve = influence_sweep(ds, scores, fractions, parse_sweep_value(o.value),
                                     o.baseline_seed, o.threads);
  if (o.csv) {
    out << "fraction,value,n";
    if (curve.baseline) out << ",baseline_value,baseline_n";
    out << '\n';
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const auto& p = curve.points[i];
      out << num(p.fraction) << ',' << opt_num(p.value) << ',' << p.n_contexts;
      if (curve.baseline) {
        const auto& b = (*curve.baseline)[i];
        out << ',' << opt_num(b.value) << ',' << b.n_contexts;
      }
      out << '\n';
    }
    return;
  }
  auto points_json = [](const std::vector<SweepPoint>& points) {
    OJson arr = OJson::array();
    for (const auto& p : points) {
      OJson jp;
      jp["fraction"] = p.fraction;
      jp["value"] = p.value ? OJson(*p.value) : OJson(nullptr);
      jp["n"] = p.n_contexts;
      arr.push_back(std::move(jp));
    }
    return arr;
  };
  OJson j;
  j["value"] = o.value;
  j["points"] = points_json(curve.points);
  if (curve.baseline) {
    j["baseline_seed"] = *o.baseline_seed;
    j["baseline"] = points_json(*curve.baseline);
  }
  emit_json(j, out);
}

void cmd_synth(const Options& o, std::ostream& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(o.spec_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("--spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("--spec must be a JSON object");
  SyntheticSpec spec;
  try {
    spec.n_semantic = j.value("n_semantic", spec.n_semantic);
    spec.n_realizations_per = j.value("n_realizations_per", spec.n_realizations_per);
    spec.n_questions_per = j.value("n_questions_per", spec.n_questions_per);
    spec.n_classes = j.value("n_classes", spec.n_classes);
    spec.seed = j.value("seed", spec.seed);
    spec.sharpness = j.value("sharpness", spec.sharpness);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("--spec has a field of the wrong type: ") + e.what());
  }
  save_dataset(generate_synthetic(spec), out);
}

unsigned default_threads() {
  if (const char* env = std::getenv("INFLUX_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.threads = default_threads();

  CLI::App app{"influx: semantic and linguistic influence analysis of classifier outputs"};
  app.name("influx");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--threads", o.threads,
                 "Worker threads (default: $INFLUX_THREADS or 1); never changes results")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", o.out_path, "Write output to this file instead of stdout");

  const std::string task_help =
      "Task: rc|mcrc|multi_element or sc|single_element (default: inferred)";
  const auto task_check =
      CLI::IsMember({"rc", "mcrc", "multi_element", "sc", "single_element"});
  auto add_in = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--in", o.in_path, help)->required()->check(CLI::ExistingFile);
  };
  auto add_task = [&](CLI::App* sub) {
    sub->add_option("--task", o.task, task_help)->check(task_check);
  };

  auto* influence = app.add_subcommand("influence", "Plug-in influence decomposition of a dataset");
  auto* oracle = app.add_subcommand("oracle", "Exact enumerated influence decomposition");
  for (auto* sub : {influence, oracle}) {
    add_in(sub, "Dataset JSONL");
    add_task(sub);
    sub->add_option("--unit", o.unit, "Display unit: nats or bits")
        ->check(CLI::IsMember({"nats", "bits"}));
    sub->add_flag("--table", o.table, "Aligned text table instead of JSON");
  }

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit a calibration temperature to logits");
  add_in(calibrate_cmd, "Logits JSONL");

  auto* readability = app.add_subcommand("readability", "Flesch reading-ease scores as CSV");
  add_in(readability, "Text file (one text per line) or dataset JSONL with --dataset");
  readability->add_flag("--dataset", o.dataset_input, "Read realization texts from a dataset");
  add_task(readability);

  auto* filter = app.add_subcommand("filter-questions", "Split questions into kept and removed");
  add_in(filter, "Text file (one question per line) or dataset JSONL with --dataset");
  filter->add_flag("--dataset", o.dataset_input, "Read question texts from a dataset");
  add_task(filter);

  auto* diversity = app.add_subcommand("diversity", "Semantic and linguistic embedding diversity");
  add_in(diversity, "Embeddings JSONL");
  diversity->add_option("--semantic-in", o.semantic_in,
                        "Embeddings for semantic diversity (default: --in)")
      ->check(CLI::ExistingFile);

  auto* agreement = app.add_subcommand("agreement", "Entropy-filtered readability/probability agreement");
  add_in(agreement, "Dataset JSONL");
  add_task(agreement);
  agreement->add_option("--min-gap", o.min_gap, "Minimum readability gap per pair")->capture_default_str();
  agreement->add_option("--fractions", o.fractions, "Retain fractions: start:stop:step or a,b,c")->capture_default_str();
  agreement->add_flag("--csv", o.csv, "Emit fraction,value,n CSV");

  auto* sweep = app.add_subcommand("sweep", "Influence over top-ranked instance subsets");
  add_in(sweep, "Dataset JSONL");
  add_task(sweep);
  sweep->add_option("--order-by", o.order_by, "CSV of instance_id,score")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--fractions", o.fractions, "Subset fractions: start:stop:step or a,b,c")->capture_default_str();
  sweep->add_option("--value", o.value, "Value to report")->capture_default_str()
      ->check(CLI::IsMember(
          {"relative_question", "relative_context", "relative_semantic", "total"}));
  sweep->add_option("--baseline-seed", o.baseline_seed, "Also sweep a seeded random ordering");
  sweep->add_flag("--csv", o.csv, "Emit fraction,value,n CSV");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", o.spec_json,
                    "JSON: n_semantic, n_realizations_per, n_questions_per, "
                    "n_classes, seed, sharpness")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "influx: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ostringstream buffer;
  try {
    if (influence->parsed()) {
      cmd_influence(o, buffer, false);
    } else if (oracle->parsed()) {
      cmd_influence(o, buffer, true);
    } else if (calibrate_cmd->parsed()) {
      cmd_calibrate(o, buffer);
    } else if (readability->parsed()) {
      cmd_readability(o, buffer);
    } else if (filter->parsed()) {
      cmd_filter_questions(o, buffer);
    } else if (diversity->parsed()) {
      cmd_diversity(o, buffer);
    } else if (agreement->parsed()) {
      cmd_agreement(o, buffer);
    } else if (sweep->parsed()) {
      cmd_sweep(o, buffer);
    } else if (synth->parsed()) {
      cmd_synth(o, buffer);
    }
  } catch (const UsageError& e) {
    err << "influx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "influx: error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "influx: error: " << e.what() << '\n';
    return kExitValidation;
  }

  if (o.out_path.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.out_path, std::ios::binary);
    if (!file) {
      err << "influx: error: cannot write " << o.out_path << '\n';
      return kExitValidation;
    }
    file << buffer.str();
  }
  return kExitOk;
}

}  // namespace influx::cli
