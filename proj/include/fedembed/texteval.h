// Copyright 2026 The FedEmbed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Generation metrics over (candidate, reference) answer pairs.
//
// Word tokenization: lowercase (ASCII), split on whitespace runs, strip
// leading/trailing characters from `.,;:!?"'`, drop tokens left empty.
// Character metrics work on Unicode code points of the lowercased text;
// ChrF drops all whitespace, CER keeps single spaces between tokens.

#ifndef FEDEMBED_TEXTEVAL_H_
#define FEDEMBED_TEXTEVAL_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedembed::texteval {

std::vector<std::string> Tokenize(std::string_view text);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool empty_candidate = false;
};

Prf RougeN(std::string_view candidate, std::string_view reference, int n);
Prf RougeL(std::string_view candidate, std::string_view reference);

// Length of the longest common subsequence of two token lists.
size_t LcsLength(const std::vector<std::string>& a,
                 const std::vector<std::string>& b);

// Sentence BLEU: unsmoothed unigram precision, add-one smoothing for n >= 2,
// brevity penalty exp(1 - r/c) when c < r.
double Bleu(std::string_view candidate, std::string_view reference,
            int max_n = 4);

// Mean per-order F_beta over character orders 1..char_n and, for ChrF++,
// word orders 1..word_n. Orders absent from both sides are skipped.
double Chrf(std::string_view candidate, std::string_view reference,
            int char_n = 6, int word_n = 0, double beta = 2.0);

// Word / character Levenshtein distance over reference length.
double Wer(std::string_view candidate, std::string_view reference);
double Cer(std::string_view candidate, std::string_view reference);

struct TextPair {
  std::string query_id;
  std::string candidate;
  std::string reference;
};

using MetricValues = std::vector<std::pair<std::string, double>>;

// Keys: chrf, chrf++, r1_p, r1_r, r1_f, r2_p, r2_r, r2_f, rl_p, rl_r, rl_f,
// bleu, wer, cer.
MetricValues PairMetrics(const TextPair& pair);

struct GenReport {
  MetricValues values;                // mean over pairs
  std::vector<MetricValues> per_pair;  // input order

  double Get(const std::string& name) const;
  std::string ToJson() const;
};

GenReport EvaluateText(const std::vector<TextPair>& pairs);

// Answers JSONL: {"query_id": str, "candidate": str, "reference": str}.
std::vector<TextPair> ParseAnswers(const std::string& text,
                                   const std::string& source);

}  // namespace fedembed::texteval

#endif  // FEDEMBED_TEXTEVAL_H_
