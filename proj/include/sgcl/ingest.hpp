#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgcl/types.hpp"

namespace sgcl {

inline constexpr std::int64_t kMsPerDay = 86'400'000;

enum class LogFormat { yoochoose, diginetica };

LogFormat parse_format(const std::string& name);  // "yoochoose" | "diginetica"

struct RawEvent {
  std::string session_id;
  std::int64_t timestamp_ms = 0;  // sortable; day = timestamp_ms / kMsPerDay
  std::string item_id;
};

// Bijective external <-> internal item mapping built from the train split.
// Internal index 0 is the [mask] token and maps to the empty string.
struct Vocab {
  std::vector<std::string> items;                    // internal -> external
  std::unordered_map<std::string, ItemIndex> index;  // external -> internal
  std::vector<std::int64_t> train_count;             // occurrences in final train sessions

  Vocab() : items{""}, train_count{0} {}
  int size() const { return static_cast<int>(items.size()); }  // includes [mask]
  int real_items() const { return size() - 1; }
  ItemIndex lookup(const std::string& external) const {
    auto it = index.find(external);
    return it == index.end() ? -1 : it->second;
  }
};

struct Corpus {
  std::vector<Session> train;  // raw filtered sessions (pre-expansion), no labels
  std::vector<Session> test;
  Vocab vocab;
};

struct CorpusStats {
  std::int64_t n_clicks = 0;          // clicks in retained raw sessions
  std::int64_t n_train_sessions = 0;  // expanded (prefix, label) examples
  std::int64_t n_test_sessions = 0;
  std::int64_t n_raw_train_sessions = 0;
  std::int64_t n_raw_test_sessions = 0;
  std::int64_t n_items = 0;  // real items, [mask] excluded
  Real avg_session_length = 0.0;      // mean prefix length over expanded examples
  Real avg_raw_session_length = 0.0;  // mean raw session length
  std::map<int, std::int64_t> length_histogram;  // raw session length -> count
};

struct BuildOptions {
  int min_session_len = 2;
  int min_item_count = 5;
  int test_window_days = 1;  // 1 = last day (yoochoose), 7 = last week (diginetica)
  // Keep only the most recent fraction_num/fraction_den of train sessions.
  int fraction_num = 1;
  int fraction_den = 1;
};

// Parsing. Line 1 may be a column header and is skipped if it does not parse;
// any other malformed line raises an error naming the line number.
std::vector<RawEvent> parse_events(std::istream& in, LogFormat format);

struct ReadResult {
  std::vector<RawEvent> events;
  std::uint64_t content_hash = 0;  // FNV-1a over the decoded byte stream
};
// Accepts plain or gzip-compressed files (detected by magic bytes).
ReadResult read_events_file(const std::string& path, LogFormat format);

Corpus build_corpus(const std::vector<RawEvent>& events, const BuildOptions& opts = {});

// [x1..xn] -> ([x1],x2), ([x1,x2],x3), ..., ([x1..x_{n-1}],xn); stable order.
std::vector<Session> expand_subsequences(const std::vector<Session>& sessions);

// Keeps the last min(|s|, max_len) items; label untouched.
Session truncate_recent(Session s, int max_len = 10);

CorpusStats corpus_stats(const Corpus& corpus);
std::string format_stats(const CorpusStats& stats);  // line-oriented key=value

// Binary cache: magic "SGCL", version u16, content hash, options,
// then length-prefixed vocab and session arrays.
void save_corpus(const Corpus& corpus, const std::string& dir, std::uint64_t content_hash,
                 const BuildOptions& opts);
Corpus load_corpus(const std::string& dir);
// Hash + options stored in an existing cache, or false if none/unreadable.
bool cached_corpus_matches(const std::string& dir, std::uint64_t content_hash,
                           const BuildOptions& opts);
void write_stats_files(const CorpusStats& stats, const std::string& dir);

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xCBF29CE484222325ULL);

}  // namespace sgcl
