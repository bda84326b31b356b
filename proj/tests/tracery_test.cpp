#include <gtest/gtest.h>

#include "projedit/tracery.hpp"
#include "support.hpp"
#include "tracery_gen.hpp"

using namespace projedit;
using namespace projedit::tracery;

namespace {

Grammar g(const char* json) { return Grammar::fromJson(Json::parse(json)); }

Grammar story() { return Grammar::fromTree(parse(testsupport::loadFixture("grammars/story.json"))); }

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidParams;
}

}  // namespace

TEST(Expand, Examples) {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto t = expand(g(R"({"origin":["hello"]})"), seed);
    EXPECT_EQ(t.output, "hello");
    EXPECT_TRUE(t.root.children.empty());
    ASSERT_EQ(t.root.pieces.size(), 1u);
    EXPECT_TRUE(t.root.pieces[0].literal);
  }
  auto t = expand(g(R"({"origin":["I feel #mood#"],"mood":["happy"]})"), 3);
  EXPECT_EQ(t.output, "I feel happy");
  ASSERT_EQ(t.root.children.size(), 1u);
  EXPECT_EQ(t.root.children[0].symbol, "mood");
  EXPECT_EQ(t.root.children[0].outputSpan, (ByteRange{7, 12}));

  EXPECT_EQ(codeOf([] { expand(g(R"({"origin":["#a#"],"a":["#origin#"]})"), 1, 8); }), ErrorCode::Recursion);
  EXPECT_EQ(codeOf([] { expand(g(R"({"origin":["#nope#"]})"), 1); }), ErrorCode::Symbol);
  EXPECT_EQ(codeOf([] { expand(g(R"({"start":["x"]})"), 1); }), ErrorCode::Symbol);
  EXPECT_EQ(codeOf([] { expand(g(R"({"origin":["#origin##origin#"]})"), 1, 64); }), ErrorCode::Recursion);
}

TEST(Expand, UnclosedHashIsLiteral) {
  auto t = expand(g(R"({"origin":["#x# costs 50#"],"x":["it"]})"), 0);
  EXPECT_EQ(t.output, "it costs 50#");
  auto pieces = splitRule("a #b# c #");
  ASSERT_EQ(pieces.size(), 3u);
  EXPECT_TRUE(pieces[1].reference);
  EXPECT_EQ(pieces[1].symbol, "b");
}

TEST(Expand, SplitMixMatchesReferenceSequence) {
  SplitMix64 zero(0);
  EXPECT_EQ(zero.next(), 0xe220a8397b1dcdafull);
  EXPECT_EQ(zero.next(), 0x6e789e6aa1b965f4ull);
  SplitMix64 r(1234567);
  EXPECT_EQ(r.next(), 6457827717110365317ull);
  EXPECT_EQ(r.next(), 3203168211198807973ull);
  EXPECT_EQ(r.next(), 9817491932198370423ull);
}

TEST(Expand, GoldenOutputsAreStable) {
  auto grammar = story();
  auto golden = Json::parse(testsupport::readFile(std::filesystem::path(PROJEDIT_TEST_DATA_DIR) / "tracery_golden.json"));
  ASSERT_EQ(golden.size(), 20u);
  for (std::size_t seed = 0; seed < golden.size(); ++seed) {
    for (int run = 0; run < 3; ++run) EXPECT_EQ(expand(grammar, seed).output, golden[seed].get<std::string>()) << seed;
  }
}

TEST(Expand, TraceLeavesReproduceOutput) {
  std::mt19937 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto grammar = testsupport::randomGrammar(rng);
    auto t = expand(grammar, rng());
    ASSERT_EQ(leafText(t), t.output);
    std::function<void(const TraceNode&)> check = [&](const TraceNode& n) {
      std::size_t pos = n.outputSpan.start;
      for (const auto& p : n.pieces) {
        ASSERT_EQ(p.outputSpan.start, pos);
        pos = p.outputSpan.end;
        if (!p.literal) {
          ASSERT_EQ(n.children[p.child].outputSpan, p.outputSpan);
          check(n.children[p.child]);
        } else {
          const auto& rule = grammar.rulesFor(n.symbol)->at(n.ruleIndex);
          ASSERT_EQ(rule.substr(p.ruleRange.start, p.ruleRange.size()), t.output.substr(p.outputSpan.start, p.outputSpan.size()));
        }
      }
      ASSERT_EQ(pos, n.outputSpan.end);
    };
    check(t.root);
  }
}

TEST(ClassifyEdit, Examples) {
  auto e = classifyEdit("I feel happy", "I feel sad");
  EXPECT_EQ(e.classification, EditClass::Swap);
  EXPECT_EQ(e.region, (ByteRange{7, 12}));
  EXPECT_EQ(e.replacement, "sad");
  e = classifyEdit("ab", "aXb");
  EXPECT_EQ(e.classification, EditClass::Insert);
  EXPECT_EQ(e.region, (ByteRange{1, 1}));
  EXPECT_EQ(e.replacement, "X");
  e = classifyEdit("ab", "a");
  EXPECT_EQ(e.classification, EditClass::Delete);
  EXPECT_EQ(e.region, (ByteRange{1, 2}));
  EXPECT_EQ(codeOf([] { classifyEdit("same", "same"); }), ErrorCode::NoEdit);
}

TEST(ClassifyEdit, RegionsAlignToCharacters) {
  // é = C3 A9, è = C3 A8: the shared lead byte must not be split off
  auto e = classifyEdit("caf\xC3\xA9", "caf\xC3\xA8");
  EXPECT_EQ(e.region, (ByteRange{3, 5}));
  EXPECT_EQ(e.replacement, "\xC3\xA8");
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string a, b;
    static const char* chars[] = {"a", "b", "\xC3\xA9", "\xC3\xA8", "\xE2\x82\xAC", "\xF0\x9F\x98\x80"};
    for (int k = rng() % 6; k > 0; --k) a += chars[rng() % 6];
    for (int k = rng() % 6; k > 0; --k) b += chars[rng() % 6];
    if (a == b) continue;
    e = classifyEdit(a, b);
    std::string rebuilt = a;
    rebuilt.replace(e.region.start, e.region.size(), e.replacement);
    ASSERT_EQ(rebuilt, b);
    auto boundary = [](const std::string& s, std::size_t i) { return i >= s.size() || (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80; };
    ASSERT_TRUE(boundary(a, e.region.start) && boundary(a, e.region.end));
  }
}

TEST(Synthesize, Examples) {
  auto mood = g(R"({"origin":["I feel #mood#"],"mood":["happy"]})");
  auto t = expand(mood, 1);
  auto r = synthesize(mood, t, "I feel sad");
  ASSERT_EQ(r.status, SyncStatus::Applied);
  EXPECT_EQ(r.grammarEdit, (GrammarEdit{"mood", 0, "sad"}));
  EXPECT_EQ(expand(applyGrammarEdit(mood, *r.grammarEdit), 1).output, "I feel sad");

  auto twice = g(R"({"origin":["#x# and #x#"],"x":["a"]})");
  t = expand(twice, 1);
  ASSERT_EQ(t.output, "a and a");
  r = synthesize(twice, t, "b and a");
  EXPECT_EQ(r.status, SyncStatus::OutOfSync);
  EXPECT_EQ(r.reason, "ambiguousRuleUse");
  EXPECT_FALSE(r.grammarEdit);

  auto pair = g(R"({"origin":["#a##b#"],"a":["left"],"b":["right"]})");
  t = expand(pair, 1);
  r = synthesize(pair, t, "leXXght");
  EXPECT_EQ(r.status, SyncStatus::OutOfSync);
  EXPECT_EQ(r.reason, "crossesProvenanceBoundary");

  EXPECT_EQ(codeOf([&] { synthesize(pair.withRule("a", 0, "changed"), t, "x"); }), ErrorCode::TraceStale);
}

TEST(Synthesize, ProvenanceBreaksTies) {
  // "happy" appears in two rules; only the mood instance produced the region
  auto grammar = g(R"({"origin":["happy? I feel #mood#"],"mood":["happy"]})");
  auto t = expand(grammar, 4);
  auto r = synthesize(grammar, t, "happy? I feel glad");
  ASSERT_EQ(r.status, SyncStatus::Applied);
  EXPECT_EQ(r.grammarEdit, (GrammarEdit{"mood", 0, "glad"}));
  r = synthesize(grammar, t, "glad? I feel happy");
  ASSERT_EQ(r.status, SyncStatus::Applied);
  EXPECT_EQ(r.grammarEdit, (GrammarEdit{"origin", 0, "glad? I feel #mood#"}));

  // insert at a boundary of two rules: either would do, provenance picks one
  auto mood = g(R"({"origin":["I feel #mood#"],"mood":["happy"]})");
  t = expand(mood, 1);
  r = synthesize(mood, t, "I feel very happy");
  ASSERT_EQ(r.status, SyncStatus::Applied);
  EXPECT_EQ(r.phase, "provenance");
  EXPECT_EQ(expand(applyGrammarEdit(mood, *r.grammarEdit), 1).output, "I feel very happy");
}

TEST(Synthesize, MultipleRegionsAreOutOfSync) {
  auto grammar = g(R"({"origin":["#a# and #b#"],"a":["one"],"b":["two"]})");
  auto t = expand(grammar, 0);
  auto r = synthesize(grammar, t, "ONE and TWO");
  EXPECT_EQ(r.status, SyncStatus::OutOfSync);
}

TEST(Synthesize, GrammarEditAsDocumentAction) {
  std::string doc = R"({
  "origin": ["I feel #mood#"],
  "mood": ["happy"]
})";
  auto tree = parse(doc);
  auto grammar = Grammar::fromTree(tree);
  auto r = synthesize(grammar, expand(grammar, 9), "I feel sad");
  ASSERT_TRUE(r.grammarEdit);
  std::string edited = applyAction(tree, r.grammarEdit->toAction());
  EXPECT_EQ(edited, R"({
  "origin": ["I feel #mood#"],
  "mood": ["sad"]
})");
}

TEST(Synthesize, RandomPerturbationsAreSoundAndMostlyApplied) {
  std::mt19937 rng(20261018);
  int applied = 0, total = 0;
  std::map<std::string, int> reasons;
  while (total < 100) {
    auto grammar = testsupport::randomGrammar(rng);
    auto t = expand(grammar, rng());
    std::string edited = testsupport::perturbOutput(rng, t);
    if (edited == t.output) continue;
    ++total;
    auto r = synthesize(grammar, t, edited);
    if (r.status == SyncStatus::Applied) {
      ASSERT_TRUE(r.grammarEdit);
      ASSERT_EQ(expand(applyGrammarEdit(grammar, *r.grammarEdit), t.seed, t.depthLimit).output, edited)
          << grammar.toJson().dump() << " -> " << edited;
      ++applied;
    } else {
      ASSERT_FALSE(r.grammarEdit);
      ASSERT_FALSE(r.reason.empty());
      ++reasons[r.reason];
    }
  }
  std::string summary;
  for (const auto& [k, v] : reasons) summary += k + "=" + std::to_string(v) + " ";
  EXPECT_GE(applied, 80) << summary;
  RecordProperty("applied", applied);
}
