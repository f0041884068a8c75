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

// Runs the fixture manifest through the CLI in-process and compares each
// result with its stored expected output.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "influx/info_metrics.hpp"
#include "json.hpp"

namespace influx::testing {

struct FixtureMismatch {
  std::string name;
  std::string field;
  std::string expected;
  std::string actual;
};

struct FixtureSummary {
  std::size_t checked = 0;
  std::vector<FixtureMismatch> mismatches;

  bool ok() const { return checked > 0 && mismatches.empty(); }
  std::string describe() const {
    std::ostringstream os;
    os << checked << " fixtures, " << mismatches.size() << " mismatches\n";
    for (const auto& m : mismatches) {
      os << "  " << m.name << " [" << m.field << "]: expected '" << m.expected
         << "', actual '" << m.actual << "'\n";
    }
    return os.str();
  }
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Splits a line into alternating text and numeric tokens.
inline std::vector<std::string> tokens(const std::string& line) {
  static const std::regex number(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (auto it = std::sregex_iterator(line.begin(), line.end(), number);
       it != std::sregex_iterator(); ++it) {
    const auto at = static_cast<std::size_t>(it->position());
    if (at > pos) out.push_back(line.substr(pos, at - pos));
    out.push_back(it->str());
    pos = at + it->length();
  }
  if (pos < line.size()) out.push_back(line.substr(pos));
  return out;
}

inline bool is_number(const std::string& t) {
  return !t.empty() && (std::isdigit(static_cast<unsigned char>(t.back())) ||
                        t.back() == '.');
}

// Returns the first differing field, or nothing when the outputs agree.
inline std::optional<FixtureMismatch> compare(const std::string& expected,
                                              const std::string& actual,
                                              double tolerance) {
  if (expected == actual) return std::nullopt;
  const auto e_lines = split_lines(expected);
  const auto a_lines = split_lines(actual);
  const std::size_t n = std::max(e_lines.size(), a_lines.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string field = "line " + std::to_string(i + 1);
    const std::string e = i < e_lines.size() ? e_lines[i] : "<missing>";
    const std::string a = i < a_lines.size() ? a_lines[i] : "<missing>";
    if (e == a) continue;
    if (tolerance <= 0.0) return FixtureMismatch{"", field, e, a};
    const auto et = tokens(e), at = tokens(a);
    if (et.size() != at.size()) return FixtureMismatch{"", field, e, a};
    for (std::size_t t = 0; t < et.size(); ++t) {
      if (et[t] == at[t]) continue;
      if (!is_number(et[t]) || !is_number(at[t]) ||
          !(std::fabs(std::stod(et[t]) - std::stod(at[t])) <= tolerance)) {
        return FixtureMismatch{"", field, et[t], at[t]};
      }
    }
  }
  if (e_lines.size() == a_lines.size()) return std::nullopt;
  return FixtureMismatch{"", "line count", std::to_string(e_lines.size()),
                         std::to_string(a_lines.size())};
}

inline std::string substitute_dir(std::string arg, const std::string& dir) {
  for (std::size_t at; (at = arg.find("{dir}")) != std::string::npos;) {
    arg.replace(at, 5, dir);
  }
  return arg;
}

}  // namespace detail

inline FixtureSummary verify_fixtures(const std::string& dir) {
  const auto manifest =
      nlohmann::json::parse(detail::read_file(dir + "/manifest.json"));
  FixtureSummary summary;
  for (const auto& f : manifest.at("fixtures")) {
    const std::string name = f.at("name");
    const std::string kind = f.at("kind");
    const double tolerance = f.at("tolerance");
    ++summary.checked;
    if (kind == "ratio") {
      const double pct = 100.0 * relative_influence(f.at("inputs").at(0),
                                                    f.at("inputs").at(1));
      const double expected = f.at("expected");
      if (!(std::fabs(pct - expected) <= tolerance + 1e-12)) {
        summary.mismatches.push_back(
            {name, "percent", format_number(expected), format_number(pct)});
      }
      continue;
    }
    if (kind != "cli") {
      summary.mismatches.push_back({name, "kind", "cli|ratio", kind});
      continue;
    }
    std::vector<std::string> args;
    for (const auto& a : f.at("args")) {
      args.push_back(detail::substitute_dir(a.get<std::string>(), dir));
    }
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    if (code != cli::kExitOk) {
      summary.mismatches.push_back(
          {name, "exit code", "0", std::to_string(code) + " " + err.str()});
      continue;
    }
    const std::string expected =
        detail::read_file(dir + "/" + f.at("expected").get<std::string>());
    if (auto m = detail::compare(expected, out.str(), tolerance)) {
      m->name = name;
      summary.mismatches.push_back(*m);
    }
  }
  return summary;
}

}  // namespace influx::testing
