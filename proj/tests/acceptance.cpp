// Headless acceptance run: one PASS/FAIL line per acceptance criterion.
// Exit status is the number of failing criteria.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "anchor_gen.hpp"
#include "edit_gen.hpp"
#include "projedit/menu.hpp"
#include "projedit/service.hpp"
#include "projedit/tracery.hpp"
#include "support.hpp"
#include "tracery_gen.hpp"

using namespace projedit;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string firstFailure;

  void fail(const std::string& why) {
    if (pass) firstFailure = why;
    pass = false;
  }
};

double secondsSince(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// corpus plus the larger fixture files
std::vector<std::string> seedDocuments() {
  auto docs = corpus();
  for (const char* f : {"schemas/produce.schema.json", "schemas/vegalite.schema.json", "schemas/tracery.schema.json",
                        "schemas/cyclic.schema.json", "docs/produce.jsonc", "docs/encoding.json", "grammars/story.json"})
    docs.push_back(loadFixture(f));
  return docs;
}

std::vector<std::string> fuzzInputs(std::uint64_t seed, int count) {
  auto docs = seedDocuments();
  Mutator m(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(m.mutate(docs[i % docs.size()]));
  return out;
}

Outcome losslessness() {
  Outcome o;
  auto docs = seedDocuments();
  auto fuzz = fuzzInputs(20261018, 10000);
  std::size_t bytes = 0;
  for (const auto& f : fuzz) bytes += f.size();
  auto start = std::chrono::steady_clock::now();
  std::size_t failures = 0;
  for (const auto* set : {&docs, &fuzz})
    for (const auto& s : *set) {
      if (serialize(parse(s)) != s) {
        ++failures;
        o.fail("round trip differs for: " + s.substr(0, 60));
      }
    }
  double secs = secondsSince(start);
  if (corpus().size() < 50) o.fail("corpus has only " + std::to_string(corpus().size()) + " documents");
  if (secs >= 10) o.fail("took " + fmt(secs) + " s");
  o.detail = std::to_string(docs.size()) + " fixtures + " + std::to_string(fuzz.size()) + " fuzzed (" +
             std::to_string(bytes / 1024) + " KiB), " + std::to_string(failures) + " failures, " + fmt(secs) + " s";
  return o;
}

Outcome parserTotality() {
  Outcome o;
  auto fuzz = fuzzInputs(77, 10000);
  // a few hostile shapes on top of the mutations
  fuzz.push_back(std::string(5000, '['));
  fuzz.push_back(std::string(5000, '{'));
  fuzz.push_back("\xff\xfe");
  fuzz.push_back("\"\\u");
  fuzz.push_back("/*");
  std::size_t withErrors = 0;
  for (const auto& s : fuzz) {
    try {
      auto t = parse(s);
      if (t.root().range.start != 0 || t.root().range.end != s.size()) o.fail("root does not span input");
      if (auto why = checkTreeInvariants(t); !why.empty()) o.fail(why);
      withErrors += !t.wellFormed();
    } catch (const Error& e) {
      // invalid UTF-8 is the one documented rejection
      if (e.code() != ErrorCode::InputEncoding) o.fail(std::string("threw ") + e.what());
    } catch (const std::exception& e) {
      o.fail(std::string("threw ") + e.what());
    }
  }
  o.detail = std::to_string(fuzz.size()) + " inputs, " + std::to_string(withErrors) + " with recovered errors";
  return o;
}

Outcome synthesisSoundness() {
  Outcome o;
  std::size_t checked = 0, truncated = 0, failures = 0;
  for (const char* name : {"produce", "vegalite", "tracery"}) {
    auto schema = fixtureSchema(name);
    std::vector<const SchemaNodeDef*> defs{&schema->root()};
    for (const auto& [n, d] : schema->definitions()) defs.push_back(d);
    for (const auto* def : defs) {
      auto r = synthesizeMinimal(*def, 16);
      if (r.truncated) {
        ++truncated;
        continue;
      }
      ++checked;
      auto diags = validate(parse(r.value.dump(2)), *schema, def);
      if (!diags.empty()) {
        ++failures;
        o.fail(std::string(name) + " " + def->displayName() + ": " + diags[0].message);
      }
    }
  }
  o.detail = std::to_string(checked) + " definitions validated, " + std::to_string(failures) + " failures, " +
             std::to_string(truncated) + " truncated";
  return o;
}

Outcome editParseSafety() {
  Outcome o;
  std::mt19937_64 rng(4242);
  int pairs = 0;
  while (pairs < 1000) {
    Json value = randomValue(rng, 0);
    if (!value.is_object() && !value.is_array()) value = Json::object({{"k", value}});
    std::string text = randomText(value, rng, "", rng() % 2);
    auto tree = parse(text);
    auto action = randomAction(value, rng);
    if (!action) continue;
    ++pairs;
    try {
      auto after = parse(applyAction(tree, *action));
      if (after.countKind(NodeKind::Error) > tree.countKind(NodeKind::Error) || !after.wellFormed())
        o.fail("new error nodes after " + action->toJson().dump());
      else if (toJson(after) != model(value, *action))
        o.fail("value differs from model after " + action->toJson().dump());
    } catch (const std::exception& e) {
      o.fail(std::string("compile failed: ") + e.what());
    }
  }
  int restored = 0, attempts = 0;
  while (attempts < 1000) {
    Json value = randomValue(rng, 0);
    std::string text = randomText(value, rng, "", rng() % 2);
    auto paths = allPaths(value);
    const KeyPath& p = paths[rng() % paths.size()];
    if (p.steps().empty()) continue;
    ++attempts;
    auto edits = compile(parse(text), EditAction::deleteNode(p));
    std::string removed = text.substr(edits.at(0).range.start, edits[0].range.size());
    std::string back = apply(apply(text, edits), {{{edits[0].range.start, edits[0].range.start}, removed}});
    if (back == text) ++restored;
    else o.fail("delete+reinsert changed bytes");
  }
  o.detail = std::to_string(pairs) + " edit pairs reparse clean; delete+reinsert exact " + std::to_string(restored) + "/" +
             std::to_string(attempts);
  return o;
}

std::vector<std::string> labelsIn(const Menu& m, MenuGroup g) {
  std::vector<std::string> out;
  for (const auto& i : m.items)
    if (i.group == g) out.push_back(i.label);
  return out;
}

Outcome menuFidelity() {
  Outcome o;
  auto produce = fixtureSchema("produce");
  // expected sets straight from the schema file
  Json raw = Json::parse(loadFixture("schemas/produce.schema.json"));
  std::vector<std::string> kindEnum = raw["properties"]["kind"]["enum"];
  std::vector<std::string> declared;
  for (const auto& [k, v] : raw["properties"].items()) declared.push_back(k);
  std::sort(declared.begin(), declared.end());

  std::string doc = loadFixture("docs/produce.jsonc");
  auto tree = parse(doc);
  auto enumMenu = menuFor(tree, produce, builtinRegistry(), doc.find("\"fruit\"") + 1);
  auto got = labelsIn(enumMenu, MenuGroup::SchemaValue);
  auto want = kindEnum;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  if (got != want) o.fail("enum picklist differs");

  auto empty = menuFor(parse("{}"), produce, builtinRegistry(), 1);
  if (labelsIn(empty, MenuGroup::SchemaProperty) != declared) o.fail("empty object does not list exactly the declared names");

  std::string partial = R"({"kind": "fruit", "tags": [] })";
  auto pm = menuFor(parse(partial), produce, builtinRegistry(), partial.size() - 1);
  std::vector<std::string> absent;
  for (const auto& k : declared)
    if (k != "kind" && k != "tags") absent.push_back(k);
  if (labelsIn(pm, MenuGroup::SchemaProperty) != absent) o.fail("partial object does not list exactly the absent names");

  for (int run = 0; run < 3; ++run) {
    if (menuFor(parse(doc), produce, builtinRegistry(), doc.find("\"fruit\"") + 1).toJson().dump() != enumMenu.toJson().dump())
      o.fail("menu not byte-stable");
    if (menuFor(parse("{}"), produce, builtinRegistry(), 1).toJson().dump() != empty.toJson().dump()) o.fail("menu not byte-stable");
  }
  o.detail = "enum items " + std::to_string(got.size()) + "/" + std::to_string(want.size()) + ", empty object " +
             std::to_string(labelsIn(empty, MenuGroup::SchemaProperty).size()) + "/" + std::to_string(declared.size()) +
             " names, stable over 3 runs";
  return o;
}

Outcome autocompleteFilter() {
  Outcome o;
  std::mt19937 rng(1234);
  auto docs = fixtureDocs();
  auto reg = builtinRegistry();
  static const std::string alphabet = "abcdeilmnoprstuy ";
  int nonEmpty = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& fx = docs[rng() % docs.size()];
    auto menu = menuFor(parse(fx.text), fx.schema, reg, rng() % (fx.text.size() + 1));
    std::string q;
    if (rng() % 3 == 0 && !menu.items.empty()) {
      const auto& l = menu.items[rng() % menu.items.size()].label;
      q = l.substr(rng() % l.size(), 1 + rng() % 4);
    } else {
      for (std::size_t n = rng() % 4; n > 0; --n) q += alphabet[rng() % alphabet.size()];
    }
    auto once = filterMenu(menu, q);
    nonEmpty += !once.items.empty();
    for (const auto& item : once.items)
      if (std::find(menu.items.begin(), menu.items.end(), item) == menu.items.end()) o.fail("filter invented an item");
    if (filterMenu(once, q).toJson() != once.toJson()) o.fail("filter not idempotent for '" + q + "'");
  }
  std::string enc = loadFixture("docs/encoding.json");
  auto vl = fixtureSchema("vegalite");
  auto tree = parse(enc);
  std::size_t cursor = enc.find("\"nominal\"") + 4;
  std::string q = extractQueryAtCursor(tree, cursor);
  auto filtered = filterMenu(menuFor(tree, vl, reg, cursor), q);
  auto labels = labelsIn(filtered, MenuGroup::SchemaValue);
  bool nom = std::count(labels.begin(), labels.end(), "nominal") == 1;
  bool ord = std::count(labels.begin(), labels.end(), "ordinal") > 0;
  if (q != "nom" || !nom || ord) o.fail("'nom' case: query '" + q + "'");
  o.detail = "1000 (menu, query) pairs contractive and idempotent (" + std::to_string(nonEmpty) +
             " non-empty); 'nom' keeps nominal, drops ordinal";
  return o;
}

Outcome cascade() {
  Outcome o;
  std::mt19937 rng(8080);
  std::size_t registries = 0, replaceNodes = 0;
  for (const auto& fx : fixtureDocs()) {
    auto tree = parse(fx.text);
    auto defs = definitionNames(fx.schema);
    for (int round = 0; round < 20; ++round) {
      auto reg = randomRegistry(rng, tree, defs);
      ++registries;
      auto r = resolveAnchors(tree, fx.schema, reg);
      if (keys(r.anchors) != oracleAnchors(tree, fx.schema, reg)) o.fail("anchors differ from exhaustive oracle");
      std::map<std::pair<std::size_t, std::size_t>, int> replaces;
      for (const auto& a : r.anchors)
        if (a.placement == Placement::Replace) ++replaces[{a.nodeRange.start, a.nodeRange.end}];
      for (const auto& [range, n] : replaces)
        if (n > 1) o.fail("two replace anchors on one node");
      replaceNodes += replaces.size();
    }
  }
  auto tree = parse(R"({"a": "x"})");
  ViewRegistry two;
  two = registerView(two, customView("first", Placement::Replace, Query::syntaxNode({NodeKind::String})));
  two = registerView(two, customView("second", Placement::Replace, Query::syntaxNode({NodeKind::String})));
  auto r = resolveAnchors(tree, nullptr, two);
  if (r.anchors.size() != 1 || r.anchors[0].viewId != "second") o.fail("later view did not win");
  o.detail = std::to_string(registries) + " random registries match the oracle (" + std::to_string(replaceNodes) +
             " replace cascades); later view wins";
  return o;
}

Outcome errorDegradation() {
  Outcome o;
  std::vector<std::string> docs = {"}{", "]", "}", ",", ":"};
  for (const auto& s : fuzzInputs(555, 3000))
    if (parse(s).root().kind == NodeKind::Error) docs.push_back(s);
  auto reg = builtinRegistry();
  reg = registerView(reg, quietQuoteView());
  auto produce = fixtureSchema("produce");
  std::size_t checked = 0;
  for (const auto& d : docs) {
    auto tree = parse(d);
    if (tree.root().kind != NodeKind::Error) {
      o.fail("expected a root-level failure for '" + d + "'");
      continue;
    }
    ++checked;
    auto r = resolveAnchors(tree, produce, reg);
    if (r.status != AnchorStatus::ViewsDeactivated || !r.anchors.empty()) o.fail("views stayed active on '" + d.substr(0, 40) + "'");
  }
  o.detail = std::to_string(checked) + " root-failure documents: all viewsDeactivated with 0 anchors";
  return o;
}

Outcome schemaSearchCriterion() {
  Outcome o;
  auto vl = fixtureSchema("vegalite");
  auto results = schemaSearch(parse("{}"), vl, "cividis", 1000);
  std::vector<std::string> want = {"config", "range", "heatmap", "scheme"};
  auto it = std::find_if(results.begin(), results.end(), [&](const SearchSuggestion& s) { return s.matchedPath == want; });
  if (it == results.end()) {
    o.fail("no config.range.heatmap.scheme suggestion");
  } else {
    auto tree = parse(applyAction(parse("{}"), it->action));
    KeyPath matched{Key{"config"}, Key{"range"}, Key{"heatmap"}, Key{"scheme"}};
    const CstNode* n = resolveKeyPath(tree, matched);
    if (!n || tree.valueText(*n) != "\"cividis\"") o.fail("inserted snippet does not place cividis on the matched path");
    // the snippet must be valid along every step it introduced
    for (const auto& d : validate(tree, *vl)) {
      auto n = d.keyPath.steps().size();
      bool onPath = n > 0 && n <= matched.steps().size() &&
                    std::equal(d.keyPath.steps().begin(), d.keyPath.steps().end(), matched.steps().begin());
      if (onPath) o.fail("diagnostic on matched path: " + d.message);
    }
  }
  auto cyclic = fixtureSchema("cyclic");
  double worst = 0;
  for (const char* q : {"e", "a", "node", "zzz", "name"}) {
    auto start = std::chrono::steady_clock::now();
    schemaSearch(parse("{}"), cyclic, q, 100000);
    worst = std::max(worst, secondsSince(start));
  }
  if (worst >= 1.0) o.fail("cyclic search took " + fmt(worst) + " s");
  o.detail = "cividis snippet validates on config.range.heatmap.scheme; cyclic queries max " + fmt(worst * 1000) + " ms";
  return o;
}

Outcome traceryCriterion() {
  Outcome o;
  auto grammar = tracery::Grammar::fromTree(parse(loadFixture("grammars/story.json")));
  // golden outputs come from an independent implementation of the same rule
  auto golden = Json::parse(readFile(std::filesystem::path(PROJEDIT_TEST_DATA_DIR) / "tracery_golden.json"));
  for (std::size_t seed = 0; seed < golden.size(); ++seed)
    for (int run = 0; run < 3; ++run)
      if (tracery::expand(grammar, seed).output != golden[seed].get<std::string>()) o.fail("seed " + std::to_string(seed) + " unstable");

  std::mt19937 rng(20261018);
  int applied = 0, unsound = 0, total = 0;
  while (total < 100) {
    auto g = randomGrammar(rng);
    auto t = tracery::expand(g, rng());
    std::string edited = perturbOutput(rng, t);
    if (edited == t.output) continue;
    ++total;
    auto r = tracery::synthesize(g, t, edited);
    if (r.status != tracery::SyncStatus::Applied) continue;
    if (tracery::expand(tracery::applyGrammarEdit(g, *r.grammarEdit), t.seed, t.depthLimit).output == edited) ++applied;
    else ++unsound;
  }
  if (applied < 80) o.fail("only " + std::to_string(applied) + " applied");
  if (unsound) o.fail(std::to_string(unsound) + " unsound");

  auto twice = tracery::Grammar::fromJson(Json::parse(R"({"origin": ["#x# and #x#"], "x": ["a"]})"));
  auto t = tracery::expand(twice, 1);
  auto dup = tracery::synthesize(twice, t, "b and a");
  if (dup.status != tracery::SyncStatus::OutOfSync) o.fail("duplicate-rule divergent edit was applied");
  o.detail = std::to_string(golden.size()) + " seeds x 3 runs match golden; " + std::to_string(applied) + "/" +
             std::to_string(total) + " applied, " + std::to_string(unsound) + " unsound; duplicate case outOfSync";
  return o;
}

Outcome serviceDeterminism() {
  Outcome o;
  std::istringstream in(readFile(std::filesystem::path(PROJEDIT_TEST_DATA_DIR) / "transcript.jsonl"));
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) {
      Json e = Json::parse(line);
      entries.emplace_back(e["request"], e["response"]);
    }
  if (entries.size() != 50) o.fail("transcript has " + std::to_string(entries.size()) + " requests");
  std::size_t mismatches = 0;
  for (int run = 0; run < 2; ++run) {
    Service svc(ServiceOptions{fixture("schemas")});
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (svc.handleLine(entries[i].first) != entries[i].second) {
        ++mismatches;
        o.fail("response " + std::to_string(i + 1) + " differs");
      }
  }
  o.detail = std::to_string(entries.size()) + " requests replayed twice, " + std::to_string(mismatches) + " mismatches";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"losslessness", losslessness},
      {"parser-totality", parserTotality},
      {"synthesis-soundness", synthesisSoundness},
      {"edit-parse-safety", editParseSafety},
      {"menu-fidelity", menuFidelity},
      {"autocomplete-filter", autocompleteFilter},
      {"cascade", cascade},
      {"error-degradation", errorDegradation},
      {"schema-search", schemaSearchCriterion},
      {"tracery", traceryCriterion},
      {"service-determinism", serviceDeterminism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail;
    if (!o.pass) std::cout << " [" << o.firstFailure << "]";
    std::cout << std::endl;
    failed += !o.pass;
  }
  return failed;
}
