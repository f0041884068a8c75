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

// Flesch reading-ease scoring and the linguistic-probe question filter.
//
// Syllables are counted with a fixed heuristic: lowercase the word, count
// maximal runs of {a, e, i, o, u, y}, drop one for a silent final "e" (or the
// "e" of a final "es"/"ed") that forms its own vowel run, unless the word ends
// in consonant + "le"; never return less than one.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "influx/error.hpp"

namespace influx {

namespace detail {

inline bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

inline std::size_t count_syllables(std::string_view word) {
  if (word.empty()) throw ValidationError("empty word");
  std::string w;
  for (char c : word) {
    if (c == '\'') continue;
    if (!detail::is_ascii_alpha(c)) {
      throw ValidationError("non-alphabetic token '" + std::string(word) + "'");
    }
    w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (w.empty()) throw ValidationError("non-alphabetic token '" + std::string(word) + "'");

  std::size_t groups = 0;
  bool in_run = false;
  for (char c : w) {
    const bool v = detail::is_vowel(c);
    if (v && !in_run) ++groups;
    in_run = v;
  }

  // Position of the candidate silent "e", if the word ends in e / es / ed.
  std::size_t e_pos = std::string::npos;
  const std::size_t n = w.size();
  if (w.back() == 'e') {
    e_pos = n - 1;
  } else if (n >= 2 && w[n - 2] == 'e' && (w.back() == 's' || w.back() == 'd')) {
    e_pos = n - 2;
  }
  if (e_pos != std::string::npos) {
    const bool own_run = e_pos == 0 || !detail::is_vowel(w[e_pos - 1]);
    const bool consonant_le = e_pos == n - 1 && n >= 3 && w[n - 2] == 'l' &&
                              !detail::is_vowel(w[n - 3]);
    if (own_run && !consonant_le && groups > 0) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

struct ReadabilityBreakdown {
  double score = 0.0;  // FRES points
  std::size_t n_words = 0;
  std::size_t n_sentences = 0;
  std::size_t n_syllables = 0;
};

// Words are maximal runs of letters and apostrophes containing a letter;
// sentences are the segments between runs of '.', '!' or '?' that contain at
// least one word.
inline ReadabilityBreakdown fres_score(std::string_view text) {
  ReadabilityBreakdown b;
  bool segment_has_words = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (detail::is_ascii_alpha(c) || c == '\'') {
      std::size_t j = i;
      bool has_letter = false;
      while (j < text.size() && (detail::is_ascii_alpha(text[j]) || text[j] == '\'')) {
        has_letter |= detail::is_ascii_alpha(text[j]);
        ++j;
      }
      if (has_letter) {
        ++b.n_words;
        b.n_syllables += count_syllables(text.substr(i, j - i));
        segment_has_words = true;
      }
      i = j;
      continue;
    }
    if (c == '.' || c == '!' || c == '?') {
      if (segment_has_words) ++b.n_sentences;
      segment_has_words = false;
    }
    ++i;
  }
  if (segment_has_words) ++b.n_sentences;
  if (b.n_words == 0) throw ValidationError("no words found");

  const double words = static_cast<double>(b.n_words);
  b.score = 206.835 - 1.015 * (words / static_cast<double>(b.n_sentences)) -
            84.6 * (static_cast<double>(b.n_syllables) / words);
  return b;
}

namespace detail {

inline std::vector<std::string> question_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

template <std::size_t N>
bool one_of(std::string_view token, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), token) != set.end();
}

inline constexpr std::array<std::string_view, 7> kUnitWords = {
    "word", "words", "sentence", "sentences", "paragraph", "paragraphs", "phrase"};
inline constexpr std::array<std::string_view, 6> kReferenceVerbs = {
    "refer", "refers", "referred", "mean", "means", "meant"};
inline constexpr std::array<std::string_view, 10> kOrdinals = {
    "first", "second", "third", "fourth", "fifth",
    "sixth", "seventh", "eighth", "ninth", "tenth"};

inline bool is_number_token(std::string_view t) {
  if (one_of(t, kOrdinals)) return true;
  std::size_t digits = 0;
  while (digits < t.size() && std::isdigit(static_cast<unsigned char>(t[digits]))) {
    ++digits;
  }
  if (digits == 0) return false;
  const std::string_view suffix = t.substr(digits);
  return suffix.empty() || suffix == "st" || suffix == "nd" || suffix == "rd" ||
         suffix == "th";
}

}  // namespace detail

// True when the question probes the wording of the text rather than its
// content: it names a structural unit (word, sentence, paragraph, phrase)
// together with "refer"/"mean", or names a unit within two tokens of a number
// or ordinal ("paragraph 2", "the second sentence").
inline bool is_linguistic_question(std::string_view question_text) {
  const auto tokens = detail::question_tokens(question_text);
  bool has_unit = false;
  bool has_verb = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (detail::one_of(tokens[i], detail::kReferenceVerbs)) has_verb = true;
    if (!detail::one_of(tokens[i], detail::kUnitWords)) continue;
    has_unit = true;
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(tokens.size() - 1, i + 2);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i && detail::is_number_token(tokens[j])) return true;
    }
  }
  return has_unit && has_verb;
}

struct QuestionFilterResult {
  std::vector<std::size_t> kept;     // indices into the input
  std::vector<std::size_t> removed;
  double removed_fraction = 0.0;
};

inline QuestionFilterResult filter_questions(const std::vector<std::string>& questions) {
  QuestionFilterResult r;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    (is_linguistic_question(questions[i]) ? r.removed : r.kept).push_back(i);
  }
  if (!questions.empty()) {
    r.removed_fraction = static_cast<double>(r.removed.size()) /
                         static_cast<double>(questions.size());
  }
  return r;
}

}  // namespace influx
