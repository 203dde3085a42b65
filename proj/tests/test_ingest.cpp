#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "sgcl/ingest.hpp"

using namespace sgcl;

namespace {
const std::string kDataDir = TEST_DATA_DIR;

std::vector<RawEvent> parse_str(const std::string& text, LogFormat fmt) {
  std::istringstream in(text);
  return parse_events(in, fmt);
}
}  // namespace

TEST_CASE("yoochoose line parses to session/item with sortable timestamp") {
  auto events = parse_str("1,2014-04-07T10:51:09.277Z,214536502,0\n", LogFormat::yoochoose);
  REQUIRE(events.size() == 1);
  CHECK(events[0].session_id == "1");
  CHECK(events[0].item_id == "214536502");
  CHECK(events[0].timestamp_ms == 1396867869277LL);
}

TEST_CASE("diginetica line parses; timeframe orders within the event day") {
  auto events = parse_str("1;NA;81766;526309;2016-05-09\n", LogFormat::diginetica);
  REQUIRE(events.size() == 1);
  CHECK(events[0].session_id == "1");
  CHECK(events[0].item_id == "81766");
  CHECK(events[0].timestamp_ms == 1462752526309LL);
  CHECK(events[0].timestamp_ms / kMsPerDay == 16930);  // 2016-05-09
}

TEST_CASE("empty stream and parse errors") {
  CHECK(parse_str("", LogFormat::yoochoose).empty());

  // header on line 1 is tolerated
  auto with_header = parse_str("sessionId;userId;itemId;timeframe;eventdate\n"
                               "1;NA;81766;526309;2016-05-09\n",
                               LogFormat::diginetica);
  CHECK(with_header.size() == 1);

  // malformed elsewhere names the line number
  CHECK_THROWS_WITH_AS(parse_str("1,2014-04-07T10:51:09.277Z,214536502,0\n"
                                 "1,not-a-timestamp,214536502,0\n",
                                 LogFormat::yoochoose),
                       doctest::Contains("line 2"), std::runtime_error);

  CHECK_THROWS_AS(parse_format("csv"), std::runtime_error);
  CHECK(parse_format("yoochoose") == LogFormat::yoochoose);
}

namespace {

// Tiny synthetic log: sessions with controllable day/length/items.
std::vector<RawEvent> synth_events() {
  std::vector<RawEvent> ev;
  auto add = [&](const std::string& sid, int day, std::vector<std::string> items) {
    for (std::size_t j = 0; j < items.size(); ++j)
      ev.push_back({sid, day * kMsPerDay + static_cast<std::int64_t>(j) * 1000, items[j]});
  };
  // day 1..3 = train candidates; day 4 = test (window 1, 4 days total)
  add("s1", 1, {"a", "b", "a", "c"});
  add("s2", 1, {"b", "a", "b"});
  add("s3", 2, {"a", "c", "b", "a"});
  add("s4", 2, {"rare", "a"});   // 'rare' occurs twice in train -> removed
  add("s5", 2, {"c", "rare"});   // both s4/s5 collapse to length 1 -> dropped
  add("s6", 3, {"b", "c", "a"});
  add("s7", 3, {"lonely"});      // length-1 session -> dropped
  add("s8", 4, {"c", "a", "b"});     // test
  add("s9", 4, {"a", "novel", "c"}); // 'novel' absent from train -> stripped
  return ev;
}

}  // namespace

TEST_CASE("build_corpus applies length, frequency and split rules") {
  BuildOptions opts;
  opts.min_item_count = 3;
  Corpus c = build_corpus(synth_events(), opts);

  // a, b, c survive; 'rare' (2x), 'lonely' (len-1 session), 'novel' (test-only) vanish
  CHECK(c.vocab.real_items() == 3);
  CHECK(c.vocab.lookup("rare") == -1);
  CHECK(c.vocab.lookup("novel") == -1);
  CHECK(c.vocab.lookup("a") >= 1);

  // s4/s5 shrank below min length; s7 was length 1
  CHECK(c.train.size() == 4);
  CHECK(c.test.size() == 2);

  // no test leakage: every test item exists in some train session
  std::set<ItemIndex> train_items;
  for (const auto& s : c.train) train_items.insert(s.items.begin(), s.items.end());
  for (const auto& s : c.test)
    for (ItemIndex i : s.items) CHECK(train_items.count(i) == 1);

  // chronological order: the day-3 session comes last in train
  CHECK(c.train.back().items.size() == 3);

  // vocab round trip on retained items
  for (int i = 1; i < c.vocab.size(); ++i)
    CHECK(c.vocab.lookup(c.vocab.items[static_cast<std::size_t>(i)]) == i);
}

TEST_CASE("fraction keeps the most recent train sessions") {
  BuildOptions opts;
  opts.min_item_count = 1;
  opts.fraction_num = 1;
  opts.fraction_den = 2;
  Corpus c = build_corpus(synth_events(), opts);
  // 6 train sessions pass the length filter; keep ceil(6/2) = 3 most recent
  CHECK(c.train.size() == 3);
}

TEST_CASE("empty corpus after filtering raises") {
  std::vector<RawEvent> ev = {{"s1", 1000, "x"}};  // single length-1 session
  CHECK_THROWS_WITH_AS(build_corpus(ev), doctest::Contains("empty corpus"),
                       std::runtime_error);
  CHECK_THROWS_AS(build_corpus({}), std::runtime_error);
}

TEST_CASE("expand_subsequences yields every prefix with its label") {
  Session s;
  s.items = {5, 7, 9};
  auto ex = expand_subsequences({s});
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].items == std::vector<ItemIndex>{5});
  CHECK(ex[0].label == 7);
  CHECK(ex[1].items == std::vector<ItemIndex>{5, 7});
  CHECK(ex[1].label == 9);

  Session pair;
  pair.items = {1, 2};
  CHECK(expand_subsequences({pair}).size() == 1);

  std::vector<Session> three(3);
  for (auto& t : three) t.items = {1, 2, 3, 4};
  CHECK(expand_subsequences(three).size() == 9);
}

TEST_CASE("truncate_recent keeps the tail") {
  Session s;
  for (int i = 1; i <= 12; ++i) s.items.push_back(i);
  s.label = 99;
  Session t = truncate_recent(s, 10);
  CHECK(t.size() == 10);
  CHECK(t.items.front() == 3);
  CHECK(t.items.back() == 12);
  CHECK(t.label == 99);

  Session short3;
  short3.items = {1, 2, 3};
  CHECK(truncate_recent(short3, 10).items == short3.items);
  CHECK(truncate_recent(short3, 1).items == std::vector<ItemIndex>{3});
  CHECK_THROWS_AS(truncate_recent(short3, 0), std::invalid_argument);
}

TEST_CASE("bundled fixture reproduces the hand-counted golden stats") {
  ReadResult r = read_events_file(kDataDir + "/fixture_yoochoose.csv", LogFormat::yoochoose);
  Corpus c = build_corpus(r.events);
  CorpusStats st = corpus_stats(c);

  CHECK(st.n_clicks == 180);
  CHECK(st.n_raw_train_sessions == 33);
  CHECK(st.n_raw_test_sessions == 12);
  CHECK(st.n_train_sessions == 105);
  CHECK(st.n_test_sessions == 30);
  CHECK(st.n_items == 10);
  CHECK(st.avg_raw_session_length == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(st.avg_session_length == doctest::Approx(2.4074074074).epsilon(1e-9));
  std::map<int, std::int64_t> expected_hist{{2, 7}, {3, 15}, {4, 9}, {5, 3}, {6, 7}, {7, 4}};
  CHECK(st.length_histogram == expected_hist);

  // expansion count law
  std::int64_t prefix_sum = 0;
  for (const auto& s : c.train) prefix_sum += s.size() - 1;
  CHECK(prefix_sum == static_cast<std::int64_t>(expand_subsequences(c.train).size()));
}

TEST_CASE("gzip input parses identically and filtering is idempotent") {
  ReadResult plain = read_events_file(kDataDir + "/fixture_yoochoose.csv", LogFormat::yoochoose);
  ReadResult gz = read_events_file(kDataDir + "/fixture_yoochoose.csv.gz", LogFormat::yoochoose);
  REQUIRE(plain.events.size() == gz.events.size());
  for (std::size_t i = 0; i < plain.events.size(); ++i) {
    CHECK(plain.events[i].session_id == gz.events[i].session_id);
    CHECK(plain.events[i].item_id == gz.events[i].item_id);
  }
  // hash covers the decoded stream, so both spellings of the same content match
  CHECK(plain.content_hash == gz.content_hash);

  // building twice from the same events gives identical output
  Corpus a = build_corpus(plain.events);
  Corpus b = build_corpus(plain.events);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].items == b.train[i].items);
  CHECK(a.vocab.items == b.vocab.items);
}

TEST_CASE("corpus cache round trip and invalidation") {
  ReadResult r = read_events_file(kDataDir + "/fixture_yoochoose.csv", LogFormat::yoochoose);
  Corpus c = build_corpus(r.events);
  std::string dir = (std::filesystem::temp_directory_path() / "sgcl_cache_test").string();
  BuildOptions opts;
  save_corpus(c, dir, r.content_hash, opts);
  CHECK(cached_corpus_matches(dir, r.content_hash, opts));
  BuildOptions other = opts;
  other.min_item_count = 7;
  CHECK_FALSE(cached_corpus_matches(dir, r.content_hash, other));
  CHECK_FALSE(cached_corpus_matches(dir, r.content_hash ^ 1, opts));

  Corpus loaded = load_corpus(dir);
  CHECK(loaded.vocab.items == c.vocab.items);
  CHECK(loaded.vocab.train_count == c.vocab.train_count);
  REQUIRE(loaded.train.size() == c.train.size());
  for (std::size_t i = 0; i < c.train.size(); ++i)
    CHECK(loaded.train[i].items == c.train[i].items);
  REQUIRE(loaded.test.size() == c.test.size());
  for (std::size_t i = 0; i < c.test.size(); ++i) CHECK(loaded.test[i].items == c.test[i].items);

  std::filesystem::remove_all(dir);
}
