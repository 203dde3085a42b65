#include "sgcl/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sgcl {

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw std::runtime_error("malformed line " + std::to_string(line_no) + ": " + why);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

// Howard Hinnant's civil-date algorithm; proleptic Gregorian.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// "YYYY-MM-DD" -> epoch day; false on any deviation.
bool parse_date(const std::string& s, std::int64_t& day) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  std::int64_t y, m, d;
  if (!parse_int64(s.substr(0, 4), y) || !parse_int64(s.substr(5, 2), m) ||
      !parse_int64(s.substr(8, 2), d))
    return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  day = days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
  return true;
}

// ISO-8601 timestamp like "2014-04-07T10:51:09.277Z" -> epoch milliseconds.
bool parse_iso8601_ms(const std::string& s, std::int64_t& ms) {
  if (s.size() < 19 || s[10] != 'T') return false;
  std::int64_t day;
  if (!parse_date(s.substr(0, 10), day)) return false;
  std::int64_t h, mi, se;
  if (s[13] != ':' || s[16] != ':') return false;
  if (!parse_int64(s.substr(11, 2), h) || !parse_int64(s.substr(14, 2), mi) ||
      !parse_int64(s.substr(17, 2), se))
    return false;
  std::int64_t frac = 0;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    std::size_t end = pos + 1;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    std::string digits = s.substr(pos + 1, std::min<std::size_t>(3, end - pos - 1));
    while (digits.size() < 3) digits.push_back('0');
    if (!parse_int64(digits, frac)) return false;
  }
  ms = ((day * 24 + h) * 60 + mi) * 60'000 + se * 1000 + frac;
  return true;
}

bool parse_line(const std::string& line, LogFormat format, RawEvent& ev, std::string& why) {
  if (format == LogFormat::yoochoose) {
    // session,timestamp,item[,category]
    std::vector<std::string> f = split(line, ',');
    if (f.size() < 3) {
      why = "expected at least 3 comma-separated fields";
      return false;
    }
    if (!parse_iso8601_ms(f[1], ev.timestamp_ms)) {
      why = "bad timestamp '" + f[1] + "'";
      return false;
    }
    ev.session_id = f[0];
    ev.item_id = f[2];
  } else {
    // sessionId;userId;itemId;timeframe;eventdate
    std::vector<std::string> f = split(line, ';');
    if (f.size() < 5) {
      why = "expected 5 semicolon-separated fields";
      return false;
    }
    std::int64_t timeframe, day;
    if (!parse_int64(f[3], timeframe)) {
      why = "bad timeframe '" + f[3] + "'";
      return false;
    }
    if (!parse_date(f[4], day)) {
      why = "bad eventdate '" + f[4] + "'";
      return false;
    }
    // Clamp the within-session offset inside the event's day so the day
    // remains recoverable as timestamp / kMsPerDay.
    ev.timestamp_ms = day * kMsPerDay + std::min<std::int64_t>(timeframe, kMsPerDay - 1);
    ev.session_id = f[0];
    ev.item_id = f[2];
  }
  if (ev.session_id.empty()) {
    why = "empty session id";
    return false;
  }
  if (ev.item_id.empty()) {
    why = "empty item id";
    return false;
  }
  if (ev.timestamp_ms < 0) {
    why = "negative timestamp";
    return false;
  }
  return true;
}

// Numeric-aware order for opaque ids: digit strings compare as numbers.
bool id_less(const std::string& a, const std::string& b) {
  auto all_digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
      return std::isdigit(c);
    });
  };
  if (all_digits(a) && all_digits(b)) {
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

struct GroupedSession {
  std::string id;
  std::vector<std::string> items;
  std::int64_t end_ts = 0;
};

void filter_short(std::vector<GroupedSession>& sessions, int min_len) {
  std::erase_if(sessions, [min_len](const GroupedSession& s) {
    return static_cast<int>(s.items.size()) < min_len;
  });
}

}  // namespace

LogFormat parse_format(const std::string& name) {
  if (name == "yoochoose") return LogFormat::yoochoose;
  if (name == "diginetica") return LogFormat::diginetica;
  throw std::runtime_error("unknown format '" + name + "' (expected yoochoose or diginetica)");
}

std::vector<RawEvent> parse_events(std::istream& in, LogFormat format) {
  std::vector<RawEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RawEvent ev;
    std::string why;
    if (!parse_line(line, format, ev, why)) {
      if (line_no == 1) continue;  // tolerate a column header
      malformed(line_no, why);
    }
    events.push_back(std::move(ev));
  }
  return events;
}

ReadResult read_events_file(const std::string& path, LogFormat format) {
  gzFile f = gzopen(path.c_str(), "rb");  // reads plain files transparently too
  if (f == nullptr) throw std::runtime_error("cannot open " + path);
  std::string content;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(n));
  bool failed = n < 0;
  gzclose(f);
  if (failed) throw std::runtime_error("error while reading " + path);

  ReadResult out;
  out.content_hash = fnv1a(content.data(), content.size());
  std::istringstream in(content);
  out.events = parse_events(in, format);
  return out;
}

Corpus build_corpus(const std::vector<RawEvent>& events, const BuildOptions& opts) {
  if (events.empty()) throw std::runtime_error("build_corpus: no events");

  // Group by session id, order each session by (timestamp, file order).
  std::unordered_map<std::string, std::vector<std::pair<std::int64_t, std::size_t>>> groups;
  for (std::size_t i = 0; i < events.size(); ++i)
    groups[events[i].session_id].emplace_back(events[i].timestamp_ms, i);

  std::vector<GroupedSession> sessions;
  sessions.reserve(groups.size());
  for (auto& [id, refs] : groups) {
    std::sort(refs.begin(), refs.end());
    GroupedSession s;
    s.id = id;
    s.end_ts = refs.back().first;
    for (auto& [ts, idx] : refs) s.items.push_back(events[idx].item_id);
    sessions.push_back(std::move(s));
  }

  filter_short(sessions, opts.min_session_len);

  // Chronological canonical order; ties broken by id for determinism.
  std::sort(sessions.begin(), sessions.end(), [](const GroupedSession& a, const GroupedSession& b) {
    if (a.end_ts != b.end_ts) return a.end_ts < b.end_ts;
    return id_less(a.id, b.id);
  });
  if (sessions.empty()) throw std::runtime_error("empty corpus after filtering");

  // Time split: the most recent test_window_days of sessions become test.
  std::int64_t last_day = sessions.back().end_ts / kMsPerDay;
  std::int64_t first_test_day = last_day - opts.test_window_days + 1;
  std::vector<GroupedSession> train, test;
  for (auto& s : sessions)
    (s.end_ts / kMsPerDay >= first_test_day ? test : train).push_back(std::move(s));

  // Most recent fraction of the train split (sessions are already sorted).
  if (opts.fraction_den > 1) {
    std::size_t keep = (train.size() * static_cast<std::size_t>(opts.fraction_num) +
                        opts.fraction_den - 1) /
                       static_cast<std::size_t>(opts.fraction_den);
    if (keep < train.size())
      train.erase(train.begin(), train.end() - static_cast<std::ptrdiff_t>(keep));
  }

  // Item occurrences measured on the raw train portion, before re-filtering.
  std::unordered_map<std::string, std::int64_t> count;
  for (const auto& s : train)
    for (const auto& item : s.items) ++count[item];

  auto frequent = [&](const std::string& item) {
    auto it = count.find(item);
    return it != count.end() && it->second >= opts.min_item_count;
  };
  for (auto& s : train) std::erase_if(s.items, [&](const std::string& i) { return !frequent(i); });
  filter_short(train, opts.min_session_len);
  if (train.empty()) throw std::runtime_error("empty corpus after filtering");

  Corpus corpus;
  for (const auto& s : train) {
    Session out;
    for (const auto& item : s.items) {
      ItemIndex idx = corpus.vocab.lookup(item);
      if (idx < 0) {
        idx = static_cast<ItemIndex>(corpus.vocab.items.size());
        corpus.vocab.items.push_back(item);
        corpus.vocab.train_count.push_back(0);
        corpus.vocab.index.emplace(item, idx);
      }
      ++corpus.vocab.train_count[idx];
      out.items.push_back(idx);
    }
    corpus.train.push_back(std::move(out));
  }

  // Test keeps only items present in the train vocabulary.
  for (auto& s : test) {
    Session out;
    for (const auto& item : s.items) {
      ItemIndex idx = corpus.vocab.lookup(item);
      if (idx >= 0) out.items.push_back(idx);
    }
    if (out.size() >= opts.min_session_len) corpus.test.push_back(std::move(out));
  }
  return corpus;
}

std::vector<Session> expand_subsequences(const std::vector<Session>& sessions) {
  std::vector<Session> out;
  for (const Session& s : sessions) {
    for (std::size_t cut = 1; cut < s.items.size(); ++cut) {
      Session ex;
      ex.items.assign(s.items.begin(), s.items.begin() + static_cast<std::ptrdiff_t>(cut));
      ex.label = s.items[cut];
      out.push_back(std::move(ex));
    }
  }
  return out;
}

Session truncate_recent(Session s, int max_len) {
  if (max_len < 1) throw std::invalid_argument("truncate_recent: max_len must be >= 1");
  if (s.size() > max_len)
    s.items.erase(s.items.begin(), s.items.end() - max_len);
  return s;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  st.n_raw_train_sessions = static_cast<std::int64_t>(corpus.train.size());
  st.n_raw_test_sessions = static_cast<std::int64_t>(corpus.test.size());
  st.n_items = corpus.vocab.real_items();

  std::int64_t raw_len_sum = 0;
  for (const auto& bucket : {corpus.train, corpus.test})
    for (const Session& s : bucket) {
      st.n_clicks += s.size();
      raw_len_sum += s.size();
      ++st.length_histogram[s.size()];
    }

  std::int64_t expanded_len_sum = 0, n_expanded = 0;
  for (const Session& s : corpus.train) {
    st.n_train_sessions += std::max(0, s.size() - 1);
  }
  for (const Session& s : corpus.test) {
    st.n_test_sessions += std::max(0, s.size() - 1);
  }
  for (const auto& bucket : {corpus.train, corpus.test})
    for (const Session& s : bucket)
      for (int prefix = 1; prefix < s.size(); ++prefix) {
        expanded_len_sum += prefix;
        ++n_expanded;
      }

  std::int64_t n_raw = st.n_raw_train_sessions + st.n_raw_test_sessions;
  if (n_raw > 0)
    st.avg_raw_session_length = static_cast<Real>(raw_len_sum) / static_cast<Real>(n_raw);
  if (n_expanded > 0)
    st.avg_session_length = static_cast<Real>(expanded_len_sum) / static_cast<Real>(n_expanded);
  return st;
}

std::string format_stats(const CorpusStats& st) {
  std::ostringstream os;
  os << "n_clicks=" << st.n_clicks << "\n"
     << "n_train_sessions=" << st.n_train_sessions << "\n"
     << "n_test_sessions=" << st.n_test_sessions << "\n"
     << "n_raw_train_sessions=" << st.n_raw_train_sessions << "\n"
     << "n_raw_test_sessions=" << st.n_raw_test_sessions << "\n"
     << "n_items=" << st.n_items << "\n"
     << "avg_session_length=" << st.avg_session_length << "\n"
     << "avg_raw_session_length=" << st.avg_raw_session_length << "\n";
  return os.str();
}

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'L'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("corpus cache truncated");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  auto len = get<std::uint32_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw std::runtime_error("corpus cache truncated");
  return s;
}

void put_sessions(std::ostream& os, const std::vector<Session>& sessions) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sessions.size()));
  for (const Session& s : sessions) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.items.size()));
    for (ItemIndex i : s.items) put<std::int32_t>(os, i);
  }
}

std::vector<Session> get_sessions(std::istream& is) {
  auto n = get<std::uint32_t>(is);
  std::vector<Session> out(n);
  for (auto& s : out) {
    auto len = get<std::uint32_t>(is);
    s.items.resize(len);
    for (auto& item : s.items) item = get<std::int32_t>(is);
  }
  return out;
}

void put_options(std::ostream& os, const BuildOptions& o) {
  put<std::int32_t>(os, o.min_session_len);
  put<std::int32_t>(os, o.min_item_count);
  put<std::int32_t>(os, o.test_window_days);
  put<std::int32_t>(os, o.fraction_num);
  put<std::int32_t>(os, o.fraction_den);
}

BuildOptions get_options(std::istream& is) {
  BuildOptions o;
  o.min_session_len = get<std::int32_t>(is);
  o.min_item_count = get<std::int32_t>(is);
  o.test_window_days = get<std::int32_t>(is);
  o.fraction_num = get<std::int32_t>(is);
  o.fraction_den = get<std::int32_t>(is);
  return o;
}

std::string cache_path(const std::string& dir) { return dir + "/corpus.sgcl"; }

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& dir, std::uint64_t content_hash,
                 const BuildOptions& opts) {
  std::filesystem::create_directories(dir);
  std::ofstream os(cache_path(dir), std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + cache_path(dir));
  os.write(kMagic, sizeof kMagic);
  put<std::uint16_t>(os, kVersion);
  put<std::uint64_t>(os, content_hash);
  put_options(os, opts);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(corpus.vocab.size()));
  for (int i = 0; i < corpus.vocab.size(); ++i) {
    put_string(os, corpus.vocab.items[i]);
    put<std::int64_t>(os, corpus.vocab.train_count[i]);
  }
  put_sessions(os, corpus.train);
  put_sessions(os, corpus.test);
  if (!os) throw std::runtime_error("write failed for " + cache_path(dir));
}

namespace {

std::ifstream open_cache(const std::string& dir, std::uint64_t& hash, BuildOptions& opts) {
  std::ifstream is(cache_path(dir), std::ios::binary);
  if (!is) throw std::runtime_error("no corpus cache in " + dir);
  char magic[4];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error(cache_path(dir) + " is not a corpus cache");
  auto version = get<std::uint16_t>(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported corpus cache version " + std::to_string(version));
  hash = get<std::uint64_t>(is);
  opts = get_options(is);
  return is;
}

}  // namespace

Corpus load_corpus(const std::string& dir) {
  std::uint64_t hash;
  BuildOptions opts;
  std::ifstream is = open_cache(dir, hash, opts);
  Corpus corpus;
  auto vocab_size = get<std::uint32_t>(is);
  corpus.vocab.items.clear();
  corpus.vocab.train_count.clear();
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    std::string item = get_string(is);
    corpus.vocab.items.push_back(item);
    corpus.vocab.train_count.push_back(get<std::int64_t>(is));
    if (i > 0) corpus.vocab.index.emplace(std::move(item), static_cast<ItemIndex>(i));
  }
  corpus.train = get_sessions(is);
  corpus.test = get_sessions(is);
  return corpus;
}

bool cached_corpus_matches(const std::string& dir, std::uint64_t content_hash,
                           const BuildOptions& opts) {
  try {
    std::uint64_t hash;
    BuildOptions stored;
    open_cache(dir, hash, stored);
    return hash == content_hash && stored.min_session_len == opts.min_session_len &&
           stored.min_item_count == opts.min_item_count &&
           stored.test_window_days == opts.test_window_days &&
           stored.fraction_num == opts.fraction_num && stored.fraction_den == opts.fraction_den;
  } catch (const std::exception&) {
    return false;
  }
}

void write_stats_files(const CorpusStats& stats, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream txt(dir + "/stats.txt", std::ios::trunc);
  txt << format_stats(stats);
  std::ofstream csv(dir + "/length_hist.csv", std::ios::trunc);
  csv << "length,count\n";
  for (const auto& [len, count] : stats.length_histogram) csv << len << "," << count << "\n";
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace sgcl
