#pragma once

// Shared helpers for the test suites: fixture loading, a JSONC mutation
// fuzzer, and oracles that are independent of the engine's own code paths.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "projedit/jsonc.hpp"

namespace testsupport {

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path fixture(std::string_view name) {
  return std::filesystem::path(PROJEDIT_FIXTURES_DIR) / std::string(name);
}

inline std::string loadFixture(std::string_view name) { return readFile(fixture(name)); }

inline std::vector<std::string> corpus() {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(fixture("corpus"))) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(readFile(p));
  return out;
}

/// Removes comments and trailing commas with a character scanner that knows
/// nothing about the engine's tree. Only meaningful for well-formed input.
inline std::string stripJsonc(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '"') j += (s[j] == '\\') ? 2 : 1;
      out.append(s.substr(i, j + 1 - i));
      i = j + 1;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      i = s.find("*/", i + 2) + 2;
    } else if (c == ',') {
      // Drop the comma when the next significant character closes a container.
      std::size_t j = i + 1;
      while (j < s.size()) {
        if (s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r') {
          ++j;
        } else if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '/') {
          while (j < s.size() && s[j] != '\n') ++j;
        } else if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '*') {
          j = s.find("*/", j + 2) + 2;
        } else {
          break;
        }
      }
      if (j >= s.size() || (s[j] != '}' && s[j] != ']')) out.push_back(',');
      ++i;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

/// True when a strict parser rejects the text for numeric overflow only.
inline bool hasHugeNumber(const std::string& s) {
  try {
    [[maybe_unused]] auto parsed = nlohmann::json::parse(stripJsonc(s));
  } catch (const nlohmann::json::out_of_range&) {
    return true;
  } catch (const nlohmann::json::exception&) {
  }
  return false;
}

inline bool hasDuplicateKeys(const projedit::SyntaxTree& tree) {
  for (const auto& n : tree.nodes()) {
    if (n.kind != projedit::NodeKind::Object) continue;
    std::vector<std::string> names;
    for (auto m : tree.members(n)) names.push_back(tree.propertyName(tree.node(m)).decoded);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) return true;
  }
  return false;
}

/// Structural invariants of a tree: root spans the input; children are ordered,
/// disjoint and contained; parents are consistent; Error/Missing nodes carry a
/// diagnostic. Returns an empty string when all hold.
inline std::string checkTreeInvariants(const projedit::SyntaxTree& tree) {
  using namespace projedit;
  const auto& root = tree.root();
  if (root.range.start != 0 || root.range.end != tree.text().size()) return "root does not span input";
  for (const auto& n : tree.nodes()) {
    std::size_t pos = n.range.start;
    for (auto c : n.children) {
      const auto& child = tree.node(c);
      if (child.parent != n.id) return "bad parent link";
      if (child.range.start < pos) return "children overlap or out of order";
      if (child.range.end > n.range.end || child.range.start > child.range.end) return "child escapes parent";
      pos = child.range.end;
    }
    if (n.kind == NodeKind::Property) {
      std::size_t names = 0;
      std::size_t values = 0;
      for (auto c : n.children) {
        auto k = tree.node(c).kind;
        if (k == NodeKind::PropertyName) ++names;
        else if (!isComment(k) && !tree.node(c).punctuation) ++values;
      }
      if (names != 1 || values > 1) return "property shape";
      if (tree.node(n.children.front()).kind != NodeKind::PropertyName) return "property name not first";
    }
    if (n.kind == NodeKind::Error || n.kind == NodeKind::Missing) {
      bool found = std::any_of(tree.diagnostics().begin(), tree.diagnostics().end(),
                               [&](const ParseDiagnostic& d) { return d.node == n.id; });
      if (!found) return "Error/Missing node without diagnostic";
    }
  }
  // Every node reachable from the root exactly once.
  std::vector<int> seen(tree.nodes().size(), 0);
  std::vector<NodeId> stack{root.id};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]++) return "node reachable twice";
    for (auto c : tree.node(id).children) stack.push_back(c);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return "unreachable node";
  return {};
}

/// Reference for nodeAt: scan every node; keep the deepest one containing the
/// offset, preferring a node that starts at the offset on equal depth.
inline const projedit::CstNode* nodeAtOracle(const projedit::SyntaxTree& tree, std::size_t offset) {
  const projedit::CstNode* best = nullptr;
  std::size_t bestDepth = 0;
  for (const auto& n : tree.nodes()) {
    if (!(n.range.start <= offset && offset <= n.range.end)) continue;
    std::size_t d = tree.depth(n);
    bool better = !best || d > bestDepth ||
                  (d == bestDepth && n.range.start == offset && best->range.start != offset);
    if (better) {
      best = &n;
      bestDepth = d;
    }
  }
  return best;
}

/// Mutates JSONC text while keeping it valid UTF-8.
class Mutator {
 public:
  explicit Mutator(std::uint64_t seed) : rng_(seed) {}

  std::string mutate(std::string s) {
    int rounds = 1 + static_cast<int>(rng_() % 4);
    for (int r = 0; r < rounds; ++r) s = once(std::move(s));
    return s;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::size_t boundary(const std::string& s, std::size_t at) {
    at = std::min(at, s.size());
    while (at > 0 && at < s.size() && (static_cast<unsigned char>(s[at]) & 0xC0) == 0x80) --at;
    return at;
  }

  std::string once(std::string s) {
    static const std::vector<std::string> pieces = {
        "{", "}", "[", "]", ":", ",", "\"", "\"k\"", "1", "-2.5e3", "true", "null", "false", "//c\n",
        "/*x*/", "/*", "\n", " ", "\\", "\"\\u00e9\"", "é", "日本", "abc", "0x1", ",,", "\"unterminated"};
    std::size_t at = boundary(s, s.empty() ? 0 : rng_() % (s.size() + 1));
    switch (rng_() % 4) {
      case 0:
        s.insert(at, pieces[rng_() % pieces.size()]);
        break;
      case 1: {
        std::size_t end = boundary(s, at + 1 + rng_() % 6);
        if (end < at) end = at;
        s.erase(at, end - at);
        break;
      }
      case 2: {
        std::size_t end = boundary(s, at + rng_() % 12);
        if (end < at) end = at;
        std::string slice = s.substr(at, end - at);
        std::size_t to = boundary(s, s.empty() ? 0 : rng_() % (s.size() + 1));
        s.insert(to, slice);
        break;
      }
      default: {
        std::size_t end = boundary(s, at + 1 + rng_() % 3);
        if (end < at) end = at;
        s.replace(at, end - at, pieces[rng_() % pieces.size()]);
        break;
      }
    }
    return s;
  }

  std::mt19937_64 rng_;
};

}  // namespace testsupport
