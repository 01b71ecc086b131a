#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"
#include "mntest/neighborhood.hpp"
#include "mntest/parallel.hpp"
#include "mntest/random.hpp"
#include "mntest/statistics.hpp"

namespace mntest {

using TokenCounts = std::map<std::string, Count, std::less<>>;

/// Lowercased maximal runs of ASCII letters and digits. Every other byte,
/// including any byte of a multi-byte UTF-8 sequence, separates tokens, so
/// malformed input never fails.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline TokenCounts count_tokens(std::string_view text) {
  TokenCounts tc;
  for (auto& t : tokenize(text)) ++tc[t];
  return tc;
}

struct DocumentGroup {
  std::string label;
  std::vector<TokenCounts> documents;
  std::vector<std::string> names;  // file name of each document, same order

  std::size_t size() const { return documents.size(); }
};

/// One document per regular file directly under `dir`, in file-name order.
inline DocumentGroup load_group(const std::filesystem::path& dir, std::string label = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw ParseError("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  DocumentGroup g;
  g.label = label.empty() ? dir.filename().string() : std::move(label);
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + f.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    g.documents.push_back(count_tokens(buf.str()));
    g.names.push_back(f.filename().string());
  }
  return g;
}

struct CorpusComparison {
  std::vector<std::string> dictionary;
  TwoSampleCounts counts;
  std::vector<std::size_t> sampled_ids1;
  std::vector<std::size_t> sampled_ids2;
};

/// Sorted dictionary and per-group totals over the chosen documents.
inline CorpusComparison aggregate_comparison(const DocumentGroup& g1,
                                             const std::vector<std::size_t>& ids1,
                                             const DocumentGroup& g2,
                                             const std::vector<std::size_t>& ids2) {
  std::map<std::string_view, std::pair<Count, Count>> merged;
  for (std::size_t id : ids1) {
    for (const auto& [tok, c] : g1.documents.at(id)) merged[tok].first += c;
  }
  for (std::size_t id : ids2) {
    for (const auto& [tok, c] : g2.documents.at(id)) merged[tok].second += c;
  }
  if (merged.empty()) throw EmptyGroup("sampled documents contain no tokens");
  std::vector<std::string> dict;
  std::vector<Count> c1, c2;
  dict.reserve(merged.size());
  c1.reserve(merged.size());
  c2.reserve(merged.size());
  for (const auto& [tok, c] : merged) {
    dict.emplace_back(tok);
    c1.push_back(c.first);
    c2.push_back(c.second);
  }
  return {std::move(dict), make_two_sample(std::move(c1), std::move(c2)), ids1, ids2};
}

/// Sorted sample of `take` distinct indices from [0, n).
template <class URBG>
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t take, URBG& rng) {
  if (take > n) {
    throw InsufficientDocuments("cannot sample " + std::to_string(take) + " documents from " +
                                std::to_string(n));
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(take);
  std::sample(all.begin(), all.end(), std::back_inserter(out), take, rng);
  return out;
}

/// sample_size = nullopt uses every document of both groups.
template <class URBG>
CorpusComparison build_comparison(const DocumentGroup& g1, const DocumentGroup& g2,
                                  std::optional<std::size_t> sample_size, URBG& rng) {
  if (sample_size && *sample_size == 0) throw DomainError("sample size must be positive");
  if (!sample_size) {
    std::vector<std::size_t> a(g1.size()), b(g2.size());
    std::iota(a.begin(), a.end(), std::size_t{0});
    std::iota(b.begin(), b.end(), std::size_t{0});
    return aggregate_comparison(g1, a, g2, b);
  }
  auto ids1 = sample_indices(g1.size(), *sample_size, rng);
  auto ids2 = sample_indices(g2.size(), *sample_size, rng);
  return aggregate_comparison(g1, ids1, g2, ids2);
}

/// Two disjoint pseudo-groups of `sample_size` documents, both drawn from g.
template <class URBG>
CorpusComparison build_size_comparison(const DocumentGroup& g, std::size_t sample_size,
                                       URBG& rng) {
  if (sample_size == 0) throw DomainError("sample size must be positive");
  if (2 * sample_size > g.size()) {
    throw InsufficientDocuments("size mode needs " + std::to_string(2 * sample_size) +
                                " documents in group '" + g.label + "', found " +
                                std::to_string(g.size()));
  }
  auto ids = sample_indices(g.size(), 2 * sample_size, rng);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<std::size_t> a(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(sample_size));
  std::vector<std::size_t> b(ids.begin() + static_cast<std::ptrdiff_t>(sample_size), ids.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return aggregate_comparison(g, a, g, b);
}

struct CorpusStudyConfig {
  std::size_t sample_size = 50;
  std::size_t replications = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> delta_max;  // default: largest finite T + 4
  double step = kDefaultCurveStep;
};

struct ReplicationRecord {
  std::size_t replication = 0;
  std::size_t power_k = 0;
  std::size_t size_k = 0;
  double power_T = std::numeric_limits<double>::quiet_NaN();  // NaN when degenerate
  double size_T = std::numeric_limits<double>::quiet_NaN();
};

struct CorpusStudy {
  CorpusStudyConfig config;
  std::vector<ReplicationRecord> records;
  std::vector<double> deltas;
  std::vector<double> p_power_mean;
  std::vector<double> p_size_mean;
  double reject_rate_power = 0.0;  // at delta = 0
  double reject_rate_size = 0.0;
  double delta_star_power_mean = 0.0;
  double delta_star_size_mean = 0.0;
  // integral over the grid of (mean size curve - mean power curve)
  double separation_area = 0.0;
  std::size_t degenerate_power = 0;
  std::size_t degenerate_size = 0;
};

/// The curve of one replication; `power` picks the between-group comparison.
inline NeighborhoodCurve replication_curve(const CorpusStudy& s, const ReplicationRecord& r,
                                           bool power) {
  const double T = power ? r.power_T : r.size_T;
  if (std::isnan(T)) throw DegenerateVariance("replication has a degenerate variance estimate");
  return neighborhood_curve_from_T(T, s.deltas, s.config.alpha);
}

namespace detail {

inline double corpus_T(const CorpusComparison& c) {
  try {
    return proposed_T(c.counts);
  } catch (const DegenerateVariance&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

/// Repeats the two-group comparison with fresh document samples. Power mode
/// samples from g1 and g2; size mode samples two disjoint sets from g1.
/// Replication r uses its own stream, so output is independent of threads.
inline CorpusStudy corpus_neighborhood_study(const DocumentGroup& g1, const DocumentGroup& g2,
                                             const CorpusStudyConfig& cfg) {
  if (cfg.sample_size == 0) throw DomainError("sample size must be positive");
  if (cfg.replications == 0) throw DomainError("replications must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(cfg.step > 0.0)) throw DomainError("step must be positive");
  if (cfg.sample_size > g1.size() || cfg.sample_size > g2.size()) {
    throw InsufficientDocuments("sample size " + std::to_string(cfg.sample_size) +
                                " exceeds a group's document count");
  }
  if (2 * cfg.sample_size > g1.size()) {
    throw InsufficientDocuments("size mode needs " + std::to_string(2 * cfg.sample_size) +
                                " documents in group '" + g1.label + "'");
  }

  CorpusStudy s;
  s.config = cfg;
  s.records.resize(cfg.replications);
  detail::parallel_for(static_cast<std::int64_t>(cfg.replications), cfg.threads, [&](std::int64_t r) {
    Engine rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(r), StreamTag::corpus);
    const auto power = build_comparison(g1, g2, cfg.sample_size, rng);
    const auto size = build_size_comparison(g1, cfg.sample_size, rng);
    auto& rec = s.records[static_cast<std::size_t>(r)];
    rec.replication = static_cast<std::size_t>(r);
    rec.power_k = power.counts.k();
    rec.size_k = size.counts.k();
    rec.power_T = detail::corpus_T(power);
    rec.size_T = detail::corpus_T(size);
  });

  double delta_max = 0.0;
  if (cfg.delta_max) {
    delta_max = *cfg.delta_max;
  } else {
    double t_max = -std::numeric_limits<double>::infinity();
    for (const auto& rec : s.records) {
      if (std::isfinite(rec.power_T)) t_max = std::max(t_max, rec.power_T);
      if (std::isfinite(rec.size_T)) t_max = std::max(t_max, rec.size_T);
    }
    delta_max = std::isfinite(t_max) ? default_delta_max(t_max, cfg.step)
                                     : kDefaultCurveMargin;
  }
  s.deltas = delta_grid(delta_max, cfg.step);
  s.p_power_mean.assign(s.deltas.size(), 0.0);
  s.p_size_mean.assign(s.deltas.size(), 0.0);

  const double z = std_normal_upper_quantile(cfg.alpha);
  std::size_t used_power = 0, used_size = 0;
  std::size_t rej_power = 0, rej_size = 0;
  for (const auto& rec : s.records) {
    const auto add = [&](double T, std::vector<double>& mean, std::size_t& used,
                         std::size_t& rejected, double& ds, std::size_t& degenerate) {
      if (std::isnan(T)) {
        ++degenerate;
        return;
      }
      ++used;
      if (T > z) ++rejected;
      ds += delta_star_from_T(T, cfg.alpha);
      for (std::size_t i = 0; i < s.deltas.size(); ++i) mean[i] += p_delta_from_T(T, s.deltas[i]);
    };
    add(rec.power_T, s.p_power_mean, used_power, rej_power, s.delta_star_power_mean,
        s.degenerate_power);
    add(rec.size_T, s.p_size_mean, used_size, rej_size, s.delta_star_size_mean,
        s.degenerate_size);
  }
  const auto finish = [](std::vector<double>& mean, std::size_t used, std::size_t rejected,
                         double& ds, double& rate) {
    if (used == 0) {
      std::fill(mean.begin(), mean.end(), std::numeric_limits<double>::quiet_NaN());
      ds = rate = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    for (double& v : mean) v /= static_cast<double>(used);
    ds /= static_cast<double>(used);
    rate = static_cast<double>(rejected) / static_cast<double>(used);
  };
  finish(s.p_power_mean, used_power, rej_power, s.delta_star_power_mean, s.reject_rate_power);
  finish(s.p_size_mean, used_size, rej_size, s.delta_star_size_mean, s.reject_rate_size);

  double area = 0.0;
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    area += (s.p_size_mean[i] - s.p_power_mean[i]) * cfg.step;
  }
  s.separation_area = area;
  return s;
}

}  // namespace mntest
