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

#include "fedembed/texteval.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "fedembed/error.h"
#include "fedembed/io.h"

namespace fedembed::texteval {
namespace {

constexpr std::string_view kStripChars = ".,;:!?\"'";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && IsSpace(s[i])) ++i;
    size_t j = i;
    while (j < s.size() && !IsSpace(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Lenient UTF-8 decoding: a malformed byte becomes its own code point.
std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b < 0x80) {
      len = 1;
      cp = b;
    } else if ((b >> 5) == 0x6) {
      len = 2;
      cp = b & 0x1f;
    } else if ((b >> 4) == 0xe) {
      len = 3;
      cp = b & 0x0f;
    } else if ((b >> 3) == 0x1e) {
      len = 4;
      cp = b & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (c & 0x3f);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

template <typename Seq>
std::map<Seq, int> NGrams(const Seq& seq, size_t n) {
  std::map<Seq, int> counts;
  if (n == 0 || seq.size() < n) return counts;
  for (size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[Seq(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

template <typename Key>
int ClippedOverlap(const std::map<Key, int>& cand,
                   const std::map<Key, int>& ref) {
  int overlap = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

template <typename Key>
int Total(const std::map<Key, int>& counts) {
  int n = 0;
  for (const auto& [gram, c] : counts) n += c;
  return n;
}

double Harmonic(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

Prf MakePrf(double overlap, double cand_total, double ref_total) {
  Prf out;
  out.precision = cand_total > 0 ? overlap / cand_total : 0.0;
  out.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  out.f1 = Harmonic(out.precision, out.recall);
  return out;
}

template <typename Seq>
size_t Levenshtein(const Seq& a, const Seq& b) {
  std::vector<size_t> prev(b.size() + 1);
  std::vector<size_t> cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename Seq>
bool FScore(const Seq& cand, const Seq& ref, size_t n, double beta,
            double* f) {
  const auto c = NGrams(cand, n);
  const auto r = NGrams(ref, n);
  const int tc = Total(c);
  const int tr = Total(r);
  if (tc == 0 && tr == 0) return false;
  const int m = ClippedOverlap(c, r);
  const double p = tc > 0 ? static_cast<double>(m) / tc : 0.0;
  const double rc = tr > 0 ? static_cast<double>(m) / tr : 0.0;
  const double b2 = beta * beta;
  *f = (p + rc) > 0.0 ? (1.0 + b2) * p * rc / (b2 * p + rc) : 0.0;
  return true;
}

std::u32string CerCharacters(std::string_view text) {
  const auto words = SplitWhitespace(Lower(text));
  std::string joined;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) joined += ' ';
    joined += words[i];
  }
  return DecodeUtf8(joined);
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (std::string& w : SplitWhitespace(Lower(text))) {
    const size_t b = w.find_first_not_of(kStripChars);
    if (b == std::string::npos) continue;
    const size_t e = w.find_last_not_of(kStripChars);
    out.push_back(w.substr(b, e - b + 1));
  }
  return out;
}

Prf RougeN(std::string_view candidate, std::string_view reference, int n) {
  if (n != 1 && n != 2) throw ConfigError("rouge_n: n must be 1 or 2");
  const auto cand = Tokenize(candidate);
  if (cand.empty()) return Prf{0.0, 0.0, 0.0, true};
  const auto c = NGrams(cand, n);
  const auto r = NGrams(Tokenize(reference), n);
  return MakePrf(ClippedOverlap(c, r), Total(c), Total(r));
}

size_t LcsLength(const std::vector<std::string>& a,
                 const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0);
  std::vector<size_t> cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Prf RougeL(std::string_view candidate, std::string_view reference) {
  const auto cand = Tokenize(candidate);
  if (cand.empty()) return Prf{0.0, 0.0, 0.0, true};
  const auto ref = Tokenize(reference);
  return MakePrf(static_cast<double>(LcsLength(cand, ref)),
                 static_cast<double>(cand.size()),
                 static_cast<double>(ref.size()));
}

double Bleu(std::string_view candidate, std::string_view reference,
            int max_n) {
  if (max_n < 1) throw ConfigError("bleu: max_n must be >= 1");
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto c = NGrams(cand, n);
    const auto r = NGrams(ref, n);
    const double m = ClippedOverlap(c, r);
    const double t = Total(c);
    double p;
    if (n == 1) {
      if (m == 0.0) return 0.0;
      p = m / t;
    } else {
      p = (m + 1.0) / (t + 1.0);
    }
    log_sum += std::log(p);
  }
  const auto c_len = static_cast<double>(cand.size());
  const auto r_len = static_cast<double>(ref.size());
  const double bp = c_len < r_len ? std::exp(1.0 - r_len / c_len) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

double Chrf(std::string_view candidate, std::string_view reference,
            int char_n, int word_n, double beta) {
  if (char_n < 1) throw ConfigError("chrf: n must be >= 1");
  std::u32string cand;
  std::u32string ref;
  for (char32_t c : DecodeUtf8(Lower(candidate))) {
    if (c > 0x7f || !IsSpace(static_cast<char>(c))) cand.push_back(c);
  }
  for (char32_t c : DecodeUtf8(Lower(reference))) {
    if (c > 0x7f || !IsSpace(static_cast<char>(c))) ref.push_back(c);
  }
  if (cand.empty()) return 0.0;
  double sum = 0.0;
  int orders = 0;
  double f = 0.0;
  for (int n = 1; n <= char_n; ++n) {
    if (FScore(cand, ref, n, beta, &f)) {
      sum += f;
      ++orders;
    }
  }
  if (word_n > 0) {
    const auto cw = Tokenize(candidate);
    const auto rw = Tokenize(reference);
    for (int n = 1; n <= word_n; ++n) {
      if (FScore(cw, rw, n, beta, &f)) {
        sum += f;
        ++orders;
      }
    }
  }
  return orders > 0 ? sum / orders : 0.0;
}

double Wer(std::string_view candidate, std::string_view reference) {
  const auto ref = Tokenize(reference);
  if (ref.empty()) throw ConfigError("wer: reference has no tokens");
  return static_cast<double>(Levenshtein(Tokenize(candidate), ref)) /
         static_cast<double>(ref.size());
}

double Cer(std::string_view candidate, std::string_view reference) {
  const auto ref = CerCharacters(reference);
  if (ref.empty()) throw ConfigError("cer: reference is empty");
  return static_cast<double>(Levenshtein(CerCharacters(candidate), ref)) /
         static_cast<double>(ref.size());
}

MetricValues PairMetrics(const TextPair& pair) {
  const auto& c = pair.candidate;
  const auto& r = pair.reference;
  const Prf r1 = RougeN(c, r, 1);
  const Prf r2 = RougeN(c, r, 2);
  const Prf rl = RougeL(c, r);
  return {
      {"chrf", Chrf(c, r, 6, 0)},     {"chrf++", Chrf(c, r, 6, 2)},
      {"r1_p", r1.precision},         {"r1_r", r1.recall},
      {"r1_f", r1.f1},                {"r2_p", r2.precision},
      {"r2_r", r2.recall},            {"r2_f", r2.f1},
      {"rl_p", rl.precision},         {"rl_r", rl.recall},
      {"rl_f", rl.f1},                {"bleu", Bleu(c, r)},
      {"wer", Wer(c, r)},             {"cer", Cer(c, r)},
  };
}

double GenReport::Get(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  throw ConfigError("gen report has no entry " + name);
}

std::string GenReport::ToJson() const {
  OrderedJson j = OrderedJson::object();
  for (const auto& [k, v] : values) j[k] = v;
  return j.dump(2) + "\n";
}

GenReport EvaluateText(const std::vector<TextPair>& pairs) {
  if (pairs.empty()) throw ConfigError("evaluate_text: no pairs");
  GenReport report;
  for (const auto& p : pairs) report.per_pair.push_back(PairMetrics(p));
  report.values = report.per_pair.front();
  for (size_t m = 0; m < report.values.size(); ++m) {
    double s = 0.0;
    for (const auto& row : report.per_pair) s += row[m].second;
    report.values[m].second = s / static_cast<double>(pairs.size());
  }
  return report;
}

std::vector<TextPair> ParseAnswers(const std::string& text,
                                   const std::string& source) {
  std::vector<TextPair> out;
  const auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const size_t line = i + 1;
    const auto r = ParseJsonLine(lines[i], line, source);
    TextPair p;
    for (auto [key, field] : {std::pair{"query_id", &p.query_id},
                              std::pair{"candidate", &p.candidate},
                              std::pair{"reference", &p.reference}}) {
      const auto& v = RequireKey(r, key, line, source);
      if (!v.is_string()) {
        throw SchemaError(source + ":" + std::to_string(line) + ": field \"" +
                          key + "\" must be a string");
      }
      *field = v.get<std::string>();
    }
    if (Tokenize(p.reference).empty()) {
      throw SchemaError(source + ":" + std::to_string(line) +
                        ": reference must be nonempty");
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fedembed::texteval
