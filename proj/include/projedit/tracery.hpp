#pragma once

// Tracery grammar expansion with a provenance trace, and synthesis of
// grammar edits from edits to the generated output.
//
// Rule choice uses SplitMix64 seeded with the expansion seed. One value is
// drawn per symbol expansion, in pre-order (parent before children, children
// left to right), and the rule index is `draw % ruleCount`.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "projedit/edit.hpp"
#include "projedit/error.hpp"
#include "projedit/jsonc.hpp"

namespace projedit::tracery {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct RulePiece {
  bool reference = false;
  ByteRange range;     // within the rule text, including the '#' delimiters for references
  std::string symbol;  // references only
};

/// Splits a rule into literal text and `#symbol#` references. A '#' with no
/// closing partner is literal.
inline std::vector<RulePiece> splitRule(std::string_view rule) {
  std::vector<RulePiece> out;
  std::size_t lit = 0, i = 0;
  while (i < rule.size()) {
    if (rule[i] == '#') {
      auto close = rule.find('#', i + 1);
      if (close == std::string_view::npos) break;
      if (i > lit) out.push_back({false, {lit, i}, ""});
      out.push_back({true, {i, close + 1}, std::string(rule.substr(i + 1, close - i - 1))});
      i = lit = close + 1;
      continue;
    }
    ++i;
  }
  if (lit < rule.size()) out.push_back({false, {lit, rule.size()}, ""});
  return out;
}

class Grammar {
 public:
  Grammar() = default;
  Grammar(std::map<std::string, std::vector<std::string>> rules, std::string start = "origin")
      : rules_(std::move(rules)), start_(std::move(start)) {}

  static Grammar fromJson(const Json& j, std::string start = "origin") {
    if (!j.is_object()) throw Error(ErrorCode::InvalidParams, "grammar must be an object of symbol -> rules");
    std::map<std::string, std::vector<std::string>> rules;
    for (const auto& [sym, list] : j.items()) {
      if (list.is_string()) {
        rules[sym] = {list.get<std::string>()};
        continue;
      }
      if (!list.is_array()) throw Error(ErrorCode::InvalidParams, "rules for '" + sym + "' must be an array of strings");
      for (const auto& r : list) {
        if (!r.is_string()) throw Error(ErrorCode::InvalidParams, "rules for '" + sym + "' must be an array of strings");
        rules[sym].push_back(r.get<std::string>());
      }
    }
    return Grammar(std::move(rules), std::move(start));
  }

  /// Grammar from a JSONC document; the document must be well-formed.
  static Grammar fromTree(const SyntaxTree& tree, std::string start = "origin") {
    if (!tree.wellFormed()) throw Error(ErrorCode::Kind, "grammar document has syntax errors");
    return fromJson(projedit::toJson(tree), std::move(start));
  }

  Json toJson() const {
    Json j = Json::object();
    for (const auto& [s, list] : rules_) j[s] = list;
    return j;
  }

  const std::map<std::string, std::vector<std::string>>& rules() const { return rules_; }
  const std::string& startSymbol() const { return start_; }
  const std::vector<std::string>* rulesFor(const std::string& s) const {
    auto it = rules_.find(s);
    return it == rules_.end() ? nullptr : &it->second;
  }
  bool has(const std::string& s) const { return rules_.count(s) > 0; }

  Grammar withRule(const std::string& symbol, std::size_t index, std::string text) const {
    Grammar g = *this;
    g.rules_.at(symbol).at(index) = std::move(text);
    return g;
  }

  /// Missing start symbol, empty rule lists and dangling references.
  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    if (!has(start_)) out.push_back("start symbol '" + start_ + "' is not defined");
    for (const auto& [sym, list] : rules_) {
      if (list.empty()) out.push_back("symbol '" + sym + "' has no rules");
      for (std::size_t i = 0; i < list.size(); ++i)
        for (const auto& p : splitRule(list[i]))
          if (p.reference && !has(p.symbol))
            out.push_back("rule " + sym + "[" + std::to_string(i) + "] references undefined symbol '" + p.symbol + "'");
    }
    return out;
  }

  std::uint64_t fingerprint() const { return fnv1a(start_, fnv1a(toJson().dump())); }

 private:
  std::map<std::string, std::vector<std::string>> rules_;
  std::string start_ = "origin";
};

struct TracePiece {
  bool literal = true;
  ByteRange ruleRange;   // where the piece sits in the chosen rule
  ByteRange outputSpan;  // what it produced
  std::size_t child = 0;  // index into TraceNode::children for references
};

struct TraceNode {
  std::string symbol;
  std::size_t ruleIndex = 0;
  ByteRange outputSpan;
  std::vector<TracePiece> pieces;
  std::vector<TraceNode> children;

  Json toJson() const {
    Json kids = Json::array();
    for (const auto& c : children) kids.push_back(c.toJson());
    return {{"symbol", symbol}, {"ruleIndex", ruleIndex}, {"span", {outputSpan.start, outputSpan.end}}, {"children", kids}};
  }
};

struct ExpansionTrace {
  TraceNode root;
  std::uint64_t seed = 0;
  std::size_t depthLimit = 0;
  std::string output;
  std::uint64_t grammarFingerprint = 0;

  Json toJson() const { return {{"seed", seed}, {"output", output}, {"root", root.toJson()}}; }
};

inline constexpr std::size_t kDefaultDepthLimit = 32;
inline constexpr std::size_t kMaxDepthLimit = 512;
inline constexpr std::size_t kMaxOutputBytes = 1u << 20;

namespace detail {

class Expander {
 public:
  Expander(const Grammar& g, std::uint64_t seed, std::size_t limit) : g_(g), rng_(seed), limit_(std::min(limit, kMaxDepthLimit)) {}

  TraceNode run(std::string& out) { return node(g_.startSymbol(), 0, out); }

 private:
  TraceNode node(const std::string& symbol, std::size_t depth, std::string& out) {
    if (depth > limit_)
      throw Error(ErrorCode::Recursion, "expansion deeper than " + std::to_string(limit_) + " at symbol '" + symbol + "'");
    const auto* rules = g_.rulesFor(symbol);
    if (!rules || rules->empty()) throw Error(ErrorCode::Symbol, "symbol '" + symbol + "' is not defined");
    TraceNode n;
    n.symbol = symbol;
    n.ruleIndex = static_cast<std::size_t>(rng_.next() % rules->size());
    n.outputSpan.start = out.size();
    const std::string& rule = (*rules)[n.ruleIndex];
    for (const auto& p : splitRule(rule)) {
      TracePiece piece;
      piece.ruleRange = p.range;
      piece.outputSpan.start = out.size();
      if (p.reference) {
        piece.literal = false;
        piece.child = n.children.size();
        n.children.push_back(node(p.symbol, depth + 1, out));
      } else {
        out.append(rule, p.range.start, p.range.size());
        if (out.size() > kMaxOutputBytes) throw Error(ErrorCode::Recursion, "expansion output exceeds 1 MiB");
      }
      piece.outputSpan.end = out.size();
      n.pieces.push_back(piece);
    }
    n.outputSpan.end = out.size();
    return n;
  }

  const Grammar& g_;
  SplitMix64 rng_;
  std::size_t limit_;
};

inline void collectLeaves(const TraceNode& n, const std::string& output, std::string& acc) {
  for (const auto& p : n.pieces) {
    if (p.literal) acc.append(output, p.outputSpan.start, p.outputSpan.size());
    else collectLeaves(n.children[p.child], output, acc);
  }
}

}  // namespace detail

/// Concatenation of the trace's literal pieces in order.
inline std::string leafText(const ExpansionTrace& t) {
  std::string acc;
  detail::collectLeaves(t.root, t.output, acc);
  return acc;
}

inline ExpansionTrace expand(const Grammar& grammar, std::uint64_t seed, std::size_t depthLimit = kDefaultDepthLimit) {
  if (auto d = grammar.diagnostics(); !d.empty()) throw Error(ErrorCode::Symbol, d.front());
  ExpansionTrace t;
  t.seed = seed;
  t.depthLimit = depthLimit;
  t.grammarFingerprint = grammar.fingerprint();
  t.root = detail::Expander(grammar, seed, depthLimit).run(t.output);
  if (leafText(t) != t.output) throw std::logic_error("trace leaves do not reproduce the output");
  return t;
}

// ---------------------------------------------------------------------------
// Output edits

enum class EditClass { Delete, Insert, Swap };

inline std::string_view editClassName(EditClass c) {
  switch (c) {
    case EditClass::Delete: return "delete";
    case EditClass::Insert: return "insert";
    case EditClass::Swap: return "swap";
  }
  return "?";
}

struct OutputEdit {
  EditClass classification = EditClass::Swap;
  ByteRange region;  // in the original output
  std::string replacement;

  Json toJson() const {
    return {{"classification", editClassName(classification)}, {"region", {{"start", region.start}, {"end", region.end}}},
            {"replacement", replacement}};
  }
};

namespace detail {
inline bool isContinuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }
}  // namespace detail

/// The single differing region between two strings, found from the longest
/// common prefix and suffix, aligned to UTF-8 character boundaries.
inline OutputEdit classifyEdit(std::string_view original, std::string_view edited) {
  if (original == edited) throw Error(ErrorCode::NoEdit, "output is unchanged");
  std::size_t n = std::min(original.size(), edited.size());
  std::size_t p = 0;
  while (p < n && original[p] == edited[p]) ++p;
  while (p > 0 && ((p < original.size() && detail::isContinuation(original[p])) ||
                   (p < edited.size() && detail::isContinuation(edited[p]))))
    --p;
  std::size_t s = 0;
  while (s < n - p && original[original.size() - 1 - s] == edited[edited.size() - 1 - s]) ++s;
  while (s > 0 && ((original.size() - s < original.size() && detail::isContinuation(original[original.size() - s])) ||
                   (edited.size() - s < edited.size() && detail::isContinuation(edited[edited.size() - s]))))
    --s;
  OutputEdit e;
  e.region = {p, original.size() - s};
  e.replacement = std::string(edited.substr(p, edited.size() - s - p));
  if (e.replacement.empty()) e.classification = EditClass::Delete;
  else if (e.region.size() == 0) e.classification = EditClass::Insert;
  else e.classification = EditClass::Swap;
  return e;
}

// ---------------------------------------------------------------------------
// Synthesis

struct GrammarEdit {
  std::string symbol;
  std::size_t ruleIndex = 0;
  std::string newRule;

  friend bool operator==(const GrammarEdit&, const GrammarEdit&) = default;
  friend bool operator<(const GrammarEdit& a, const GrammarEdit& b) {
    return std::tie(a.symbol, a.ruleIndex, a.newRule) < std::tie(b.symbol, b.ruleIndex, b.newRule);
  }
  Json toJson() const { return {{"symbol", symbol}, {"ruleIndex", ruleIndex}, {"newRule", newRule}}; }

  /// The same change as an edit of the grammar document.
  EditAction toAction() const {
    return EditAction::replaceValue(KeyPath{Key{symbol}, Index{ruleIndex}}, newRule)
        .withLabel("Update " + symbol + "[" + std::to_string(ruleIndex) + "]", ActionSource::View);
  }
};

enum class SyncStatus { Applied, OutOfSync };

struct SyncResult {
  SyncStatus status = SyncStatus::OutOfSync;
  std::optional<GrammarEdit> grammarEdit;
  std::string reason;  // crossesProvenanceBoundary | ambiguousRuleUse | noCandidate
  std::string phase;   // enumerative | provenance, when applied
  OutputEdit edit;
  std::size_t candidates = 0;  // phase-1 candidates found

  Json toJson() const {
    Json j{{"status", status == SyncStatus::Applied ? "applied" : "outOfSync"}, {"edit", edit.toJson()},
           {"candidates", candidates}};
    if (grammarEdit) j["grammarEdit"] = grammarEdit->toJson();
    if (!reason.empty()) j["reason"] = reason;
    if (!phase.empty()) j["phase"] = phase;
    return j;
  }
};

namespace detail {

inline bool reproduces(const Grammar& g, const ExpansionTrace& t, std::string_view edited) {
  try {
    return expand(g, t.seed, t.depthLimit).output == edited;
  } catch (const Error&) {
    return false;
  }
}

inline void usedRules(const TraceNode& n, std::map<std::pair<std::string, std::size_t>, std::size_t>& uses) {
  ++uses[{n.symbol, n.ruleIndex}];
  for (const auto& c : n.children) usedRules(c, uses);
}

inline bool charBoundary(std::string_view s, std::size_t i) { return i == 0 || i >= s.size() || !isContinuation(s[i]); }

/// Rule variants carrying the classified edit somewhere in their literal text.
inline std::vector<std::string> variants(const std::string& rule, const std::string& removed, const OutputEdit& e) {
  std::set<std::string> out;
  auto pieces = splitRule(rule);
  if (!removed.empty()) {
    for (const auto& p : pieces) {
      if (p.reference) continue;
      std::string_view lit(rule.data() + p.range.start, p.range.size());
      for (auto at = lit.find(removed); at != std::string_view::npos; at = lit.find(removed, at + 1)) {
        std::string v = rule;
        v.replace(p.range.start + at, removed.size(), e.replacement);
        out.insert(std::move(v));
      }
    }
  } else {
    // Every position not strictly inside a reference token.
    std::vector<bool> inside(rule.size() + 1, false);
    for (const auto& p : pieces)
      if (p.reference)
        for (std::size_t i = p.range.start + 1; i < p.range.end; ++i) inside[i] = true;
    for (std::size_t i = 0; i <= rule.size(); ++i) {
      if (inside[i] || !charBoundary(rule, i)) continue;
      std::string v = rule;
      v.insert(i, e.replacement);
      out.insert(std::move(v));
    }
  }
  return {out.begin(), out.end()};
}

/// Deepest node whose span holds the region (an insertion point may sit on
/// either end of a span).
inline const TraceNode* deepestContaining(const TraceNode& n, const ByteRange& r) {
  for (const auto& c : n.children) {
    bool holds = c.outputSpan.start <= r.start && r.end <= c.outputSpan.end;
    if (holds && (r.size() > 0 || c.outputSpan.size() > 0)) return deepestContaining(c, r);
  }
  return &n;
}

}  // namespace detail

/// Finds a single-rule grammar change whose re-expansion (same seed) equals
/// `edited`. Returns outOfSync, with the grammar untouched, when none is found
/// or the change cannot be attributed to exactly one rule.
inline SyncResult synthesize(const Grammar& grammar, const ExpansionTrace& trace, std::string_view edited) {
  if (grammar.fingerprint() != trace.grammarFingerprint)
    throw Error(ErrorCode::TraceStale, "the grammar changed since this trace was produced");
  SyncResult result;
  result.edit = classifyEdit(trace.output, edited);
  const OutputEdit& e = result.edit;
  std::string removed = trace.output.substr(e.region.start, e.region.size());

  std::map<std::pair<std::string, std::size_t>, std::size_t> uses;
  detail::usedRules(trace.root, uses);

  // Phase 1: try the edit in every rule the trace used.
  std::set<GrammarEdit> accepted;
  for (const auto& [key, count] : uses) {
    const std::string& rule = grammar.rulesFor(key.first)->at(key.second);
    for (auto& v : detail::variants(rule, removed, e)) {
      Grammar g = grammar.withRule(key.first, key.second, v);
      if (detail::reproduces(g, trace, edited)) accepted.insert({key.first, key.second, std::move(v)});
    }
  }
  result.candidates = accepted.size();
  if (accepted.size() == 1) {
    result.status = SyncStatus::Applied;
    result.grammarEdit = *accepted.begin();
    result.phase = "enumerative";
    return result;
  }

  // Phase 2: follow provenance to the rule instance that produced the region.
  const TraceNode* node = detail::deepestContaining(trace.root, e.region);
  const TracePiece* host = nullptr;
  for (const auto& p : node->pieces) {
    if (!p.literal) continue;
    if (p.outputSpan.start <= e.region.start && e.region.end <= p.outputSpan.end) {
      host = &p;
      break;
    }
  }
  if (!host) {
    result.reason = "crossesProvenanceBoundary";
    return result;
  }
  if (uses[{node->symbol, node->ruleIndex}] > 1) {
    result.reason = "ambiguousRuleUse";
    return result;
  }
  std::string rule = grammar.rulesFor(node->symbol)->at(node->ruleIndex);
  std::size_t at = host->ruleRange.start + (e.region.start - host->outputSpan.start);
  rule.replace(at, e.region.size(), e.replacement);
  if (!detail::reproduces(grammar.withRule(node->symbol, node->ruleIndex, rule), trace, edited)) {
    result.reason = "noCandidate";
    return result;
  }
  result.status = SyncStatus::Applied;
  result.grammarEdit = GrammarEdit{node->symbol, node->ruleIndex, std::move(rule)};
  result.phase = "provenance";
  return result;
}

inline Grammar applyGrammarEdit(const Grammar& g, const GrammarEdit& e) { return g.withRule(e.symbol, e.ruleIndex, e.newRule); }

}  // namespace projedit::tracery
