#pragma once

// View registry, query matching and anchor resolution. A view is a
// placement, a query over tree nodes and a widget descriptor that a client
// renders. Replace views cascade: on one node the latest registration wins.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "projedit/edit.hpp"
#include "projedit/error.hpp"
#include "projedit/jsonc.hpp"
#include "projedit/schema.hpp"

namespace projedit {

enum class Placement { InlinePrefix, InlineSuffix, InlineBackground, Replace, Menu };

inline std::string_view placementName(Placement p) {
  switch (p) {
    case Placement::InlinePrefix: return "inline-prefix";
    case Placement::InlineSuffix: return "inline-suffix";
    case Placement::InlineBackground: return "inline-background";
    case Placement::Replace: return "replace";
    case Placement::Menu: return "menu";
  }
  return "?";
}

inline Placement placementFromName(std::string_view s) {
  for (Placement p : {Placement::InlinePrefix, Placement::InlineSuffix, Placement::InlineBackground, Placement::Replace,
                      Placement::Menu})
    if (placementName(p) == s) return p;
  if (s == "inline") return Placement::InlinePrefix;
  throw Error(ErrorCode::InvalidParams, "unknown placement '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Queries

struct Wildcard {
  enum class Kind { Any, Key, Index } kind = Kind::Any;
};
using PatternStep = std::variant<PathStep, Wildcard>;
using PathPattern = std::vector<PatternStep>;

struct Query;

namespace query {
struct SyntaxNode {
  std::vector<NodeKind> kinds;
};
struct KeyPaths {
  std::vector<PathPattern> patterns;
};
struct SchemaNode {
  std::vector<std::string> names;
};
struct Regex {
  std::vector<std::string> patterns;
  std::vector<std::regex> compiled;
};
// Named structural predicates: "hasEnum" (value node whose SchemaSet carries
// an enum), "numericArray" (array of at least 8 number literals),
// "cssColorName" (string literal naming a CSS color listed in a schema enum).
struct Predicate {
  std::string name;
};
struct AnyOf {
  std::vector<Query> alternatives;
};
}  // namespace query

struct Query {
  std::variant<query::SyntaxNode, query::KeyPaths, query::SchemaNode, query::Regex, query::Predicate, query::AnyOf> v;

  static Query syntaxNode(std::vector<NodeKind> kinds) { return {query::SyntaxNode{std::move(kinds)}}; }
  static Query keyPaths(std::vector<PathPattern> patterns) { return {query::KeyPaths{std::move(patterns)}}; }
  static Query schemaNode(std::vector<std::string> names) { return {query::SchemaNode{std::move(names)}}; }
  static Query regex(std::vector<std::string> patterns) {
    query::Regex r{std::move(patterns), {}};
    for (const auto& p : r.patterns) {
      try {
        r.compiled.emplace_back(p, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::Registry, "regex '" + p + "' does not compile: " + e.what());
      }
    }
    return {std::move(r)};
  }
  static Query predicate(std::string name) {
    if (name != "hasEnum" && name != "numericArray" && name != "cssColorName")
      throw Error(ErrorCode::Registry, "unknown predicate '" + name + "'");
    return {query::Predicate{std::move(name)}};
  }
  static Query anyOf(std::vector<Query> alternatives) { return {query::AnyOf{std::move(alternatives)}}; }

  bool needsSchemaSet() const {
    if (std::holds_alternative<query::SchemaNode>(v)) return true;
    if (const auto* p = std::get_if<query::Predicate>(&v)) return p->name != "numericArray";
    if (const auto* a = std::get_if<query::AnyOf>(&v))
      return std::any_of(a->alternatives.begin(), a->alternatives.end(), [](const Query& q) { return q.needsSchemaSet(); });
    return false;
  }

  Json toJson() const;
  static Query fromJson(const Json& j);
};

namespace detail {

inline Json patternToJson(const PathPattern& p) {
  Json out = Json::array();
  for (const auto& s : p) {
    if (const auto* w = std::get_if<Wildcard>(&s)) {
      if (w->kind == Wildcard::Kind::Any) out.push_back("*");
      else if (w->kind == Wildcard::Kind::Key) out.push_back(Json{{"key", "*"}});
      else out.push_back(Json{{"index", "*"}});
    } else {
      out.push_back(KeyPath{std::get<PathStep>(s)}.toJson()[0]);
    }
  }
  return out;
}

inline PathPattern patternFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidParams, "key path pattern must be an array");
  PathPattern out;
  for (const auto& s : j) {
    if (s == "*") out.emplace_back(Wildcard{});
    else if (s.is_object() && s.size() == 1 && s.contains("key") && s["key"] == "*") out.emplace_back(Wildcard{Wildcard::Kind::Key});
    else if (s.is_object() && s.size() == 1 && s.contains("index") && s["index"] == "*") out.emplace_back(Wildcard{Wildcard::Kind::Index});
    else out.emplace_back(KeyPath::fromJson(Json::array({s})).steps().front());
  }
  return out;
}

}  // namespace detail

inline Json Query::toJson() const {
  return std::visit(
      [](const auto& q) -> Json {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, query::SyntaxNode>) {
          Json k = Json::array();
          for (auto kind : q.kinds) k.push_back(kindName(kind));
          return {{"syntaxNode", k}};
        } else if constexpr (std::is_same_v<T, query::KeyPaths>) {
          Json p = Json::array();
          for (const auto& pat : q.patterns) p.push_back(detail::patternToJson(pat));
          return {{"keyPath", p}};
        } else if constexpr (std::is_same_v<T, query::SchemaNode>) {
          return {{"schemaNode", q.names}};
        } else if constexpr (std::is_same_v<T, query::Regex>) {
          return {{"regex", q.patterns}};
        } else if constexpr (std::is_same_v<T, query::Predicate>) {
          return {{"predicate", q.name}};
        } else {
          Json a = Json::array();
          for (const auto& alt : q.alternatives) a.push_back(alt.toJson());
          return {{"anyOf", a}};
        }
      },
      v);
}

inline Query Query::fromJson(const Json& j) {
  if (!j.is_object() || j.size() != 1) throw Error(ErrorCode::InvalidParams, "query must be an object with one selector");
  try {
    if (j.contains("syntaxNode")) {
      std::vector<NodeKind> kinds;
      for (const auto& k : j["syntaxNode"]) {
        auto kind = kindFromName(k.get<std::string>());
        if (!kind) throw Error(ErrorCode::InvalidParams, "unknown node kind " + k.dump());
        kinds.push_back(*kind);
      }
      if (kinds.empty()) throw Error(ErrorCode::InvalidParams, "syntaxNode query needs at least one kind");
      return syntaxNode(std::move(kinds));
    }
    if (j.contains("keyPath")) {
      std::vector<PathPattern> pats;
      for (const auto& p : j["keyPath"]) pats.push_back(detail::patternFromJson(p));
      if (pats.empty()) throw Error(ErrorCode::InvalidParams, "keyPath query needs at least one pattern");
      return keyPaths(std::move(pats));
    }
    if (j.contains("schemaNode")) {
      auto names = j["schemaNode"].get<std::vector<std::string>>();
      if (names.empty()) throw Error(ErrorCode::InvalidParams, "schemaNode query needs at least one name");
      return schemaNode(std::move(names));
    }
    if (j.contains("regex")) {
      auto pats = j["regex"].get<std::vector<std::string>>();
      if (pats.empty()) throw Error(ErrorCode::InvalidParams, "regex query needs at least one pattern");
      return regex(std::move(pats));
    }
    if (j.contains("predicate")) return predicate(j["predicate"].get<std::string>());
    if (j.contains("anyOf")) {
      std::vector<Query> alts;
      for (const auto& a : j["anyOf"]) alts.push_back(fromJson(a));
      return anyOf(std::move(alts));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("bad query: ") + e.what());
  }
  throw Error(ErrorCode::InvalidParams, "unknown query selector in " + j.dump());
}

inline bool patternMatches(const PathPattern& pattern, const KeyPath& path) {
  if (pattern.size() != path.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const PathStep& step = path[i];
    if (const auto* w = std::get_if<Wildcard>(&pattern[i])) {
      if (w->kind == Wildcard::Kind::Key && std::holds_alternative<Index>(step)) return false;
      if (w->kind == Wildcard::Kind::Index && !std::holds_alternative<Index>(step)) return false;
      continue;
    }
    if (!(std::get<PathStep>(pattern[i]) == step)) return false;
  }
  return true;
}

inline bool isCssColorName(std::string_view s) {
  static const std::set<std::string, std::less<>> names = {
      "aqua",  "black", "blue",   "brown",  "crimson", "cyan",      "fuchsia", "gold",  "gray",   "green",
      "grey",  "indigo", "lime",  "magenta", "maroon", "navy",      "olive",   "orange", "pink",  "purple",
      "red",   "salmon", "silver", "steelblue", "tan", "teal",      "tomato",  "violet", "white", "yellow"};
  return names.count(s) > 0;
}

namespace detail {

inline bool isValueNode(const CstNode& n) {
  return n.kind != NodeKind::Property && n.kind != NodeKind::PropertyName && !isComment(n.kind) && !n.punctuation;
}

inline bool predicateMatches(const std::string& name, const SyntaxTree& tree, const CstNode& node, const SchemaSet& set) {
  if (name == "hasEnum") {
    if (!isValueNode(node) || node.kind == NodeKind::Error) return false;
    return std::any_of(set.entries.begin(), set.entries.end(),
                       [](const SchemaSetEntry& e) { return e.def->enumValues && !e.def->enumValues->empty(); });
  }
  if (name == "numericArray") {
    if (node.kind != NodeKind::Array) return false;
    auto members = tree.members(node);
    return members.size() >= 8 &&
           std::all_of(members.begin(), members.end(), [&](NodeId m) { return tree.node(m).kind == NodeKind::Number; });
  }
  if (name == "cssColorName") {
    if (node.kind != NodeKind::String || !isCssColorName(node.decoded)) return false;
    for (const auto& e : set.entries)
      if (e.def->enumValues)
        for (const auto& v : *e.def->enumValues)
          if (v.is_string() && v.get<std::string>() == node.decoded) return true;
    return false;
  }
  return false;
}

}  // namespace detail

/// Does `q` select `node` (addressed by `path`, with applicable `set`)?
inline bool matches(const Query& q, const SyntaxTree& tree, const CstNode& node, const KeyPath& path, const SchemaSet& set) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, query::SyntaxNode>) {
          return std::find(x.kinds.begin(), x.kinds.end(), node.kind) != x.kinds.end();
        } else if constexpr (std::is_same_v<T, query::KeyPaths>) {
          return std::any_of(x.patterns.begin(), x.patterns.end(), [&](const PathPattern& p) { return patternMatches(p, path); });
        } else if constexpr (std::is_same_v<T, query::SchemaNode>) {
          return std::any_of(x.names.begin(), x.names.end(), [&](const std::string& n) { return set.hasName(n); });
        } else if constexpr (std::is_same_v<T, query::Regex>) {
          std::string text(tree.valueText(node));
          return std::any_of(x.compiled.begin(), x.compiled.end(), [&](const std::regex& r) { return std::regex_search(text, r); });
        } else if constexpr (std::is_same_v<T, query::Predicate>) {
          return detail::predicateMatches(x.name, tree, node, set);
        } else {
          return std::any_of(x.alternatives.begin(), x.alternatives.end(),
                             [&](const Query& a) { return matches(a, tree, node, path, set); });
        }
      },
      q.v);
}

// ---------------------------------------------------------------------------
// Views and registry

struct WidgetDescriptor {
  std::string kind;  // booleanToggle, colorChip, ..., or "custom"
  std::string customName;
  Json params = Json::object();

  Json toJson() const {
    Json j{{"kind", kind}, {"params", params}};
    if (kind == "custom") j["name"] = customName;
    return j;
  }
  static WidgetDescriptor fromJson(const Json& j) {
    try {
      WidgetDescriptor w;
      w.kind = j.at("kind").get<std::string>();
      w.customName = j.value("name", "");
      w.params = j.value("params", Json::object());
      return w;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidParams, std::string("bad widget: ") + e.what());
    }
  }
};

struct ViewContext {
  const SyntaxTree& tree;
  const CstNode& node;
  const KeyPath& path;
  const SchemaSet& schemaSet;
};

struct ViewSpec {
  std::string id;
  Placement placement = Placement::InlinePrefix;
  Query query;
  WidgetDescriptor widget;
  std::size_t registrationIndex = 0;
  // Extra per-anchor payload fields (slider bounds, summaries, ...).
  std::function<Json(const ViewContext&)> payload;
  // Menu views: label and optional action for the menu item.
  std::string menuLabel;
  std::function<std::optional<EditAction>(const ViewContext&)> menuAction;

  Json toJson() const {
    return {{"id", id}, {"placement", placementName(placement)}, {"query", query.toJson()},
            {"widget", widget.toJson()}, {"registrationIndex", registrationIndex}};
  }
  /// Declarative views (as found in a manifest). `label` names a menu item.
  static ViewSpec fromJson(const Json& j) {
    try {
      ViewSpec v;
      v.id = j.at("id").get<std::string>();
      v.placement = placementFromName(j.at("placement").get<std::string>());
      v.query = Query::fromJson(j.at("query"));
      v.widget = j.contains("widget") ? WidgetDescriptor::fromJson(j["widget"]) : WidgetDescriptor{"custom", v.id, Json::object()};
      v.menuLabel = j.value("label", v.id);
      return v;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidParams, std::string("bad view: ") + e.what());
    }
  }
};

/// Immutable registry; registration returns a new registry sharing nothing
/// mutable with the old one.
class ViewRegistry {
 public:
  ViewRegistry() : views_(std::make_shared<const std::vector<ViewSpec>>()) {}

  const std::vector<ViewSpec>& views() const { return *views_; }
  std::size_t size() const { return views_->size(); }
  const ViewSpec* find(std::string_view id) const {
    for (const auto& v : *views_)
      if (v.id == id) return &v;
    return nullptr;
  }

  ViewRegistry with(ViewSpec spec) const {
    if (find(spec.id)) throw Error(ErrorCode::Registry, "view id '" + spec.id + "' is already registered");
    auto next = std::make_shared<std::vector<ViewSpec>>(*views_);
    spec.registrationIndex = nextIndex_;
    next->push_back(std::move(spec));
    return ViewRegistry(std::move(next), nextIndex_ + 1);
  }

  ViewRegistry without(std::string_view id) const {
    if (!find(id)) throw Error(ErrorCode::Registry, "no view with id '" + std::string(id) + "'");
    auto next = std::make_shared<std::vector<ViewSpec>>();
    for (const auto& v : *views_)
      if (v.id != id) next->push_back(v);
    return ViewRegistry(std::move(next), nextIndex_);
  }

 private:
  ViewRegistry(std::shared_ptr<const std::vector<ViewSpec>> v, std::size_t next) : views_(std::move(v)), nextIndex_(next) {}

  std::shared_ptr<const std::vector<ViewSpec>> views_;
  std::size_t nextIndex_ = 0;
};

inline ViewRegistry registerView(const ViewRegistry& registry, ViewSpec spec) { return registry.with(std::move(spec)); }
inline ViewRegistry removeView(const ViewRegistry& registry, std::string_view id) { return registry.without(id); }

// ---------------------------------------------------------------------------
// Anchors

struct Anchor {
  std::string viewId;
  ByteRange nodeRange;
  KeyPath keyPath;
  Placement placement = Placement::InlinePrefix;
  NodeKind nodeKind = NodeKind::Null;
  std::string nodeText;
  std::vector<std::string> schemaNames;
  bool suggestionFlag = false;
  WidgetDescriptor widget;
  Json extra = Json::object();  // view-specific payload fields
  std::size_t registrationIndex = 0;

  Json toJson() const {
    Json payload{{"nodeKind", kindName(nodeKind)}, {"nodeText", nodeText}, {"schemaNames", schemaNames},
                 {"suggestionFlag", suggestionFlag}};
    Json w = widget.toJson();
    for (const auto& [k, v] : extra.items()) payload[k] = w["params"][k] = v;
    return {{"viewId", viewId}, {"nodeRange", {{"start", nodeRange.start}, {"end", nodeRange.end}}},
            {"keyPath", keyPath.toJson()}, {"placement", placementName(placement)}, {"widget", w},
            {"payload", payload}};
  }
};

enum class AnchorStatus { Ok, ViewsDeactivated };

struct AnchorResult {
  std::vector<Anchor> anchors;
  AnchorStatus status = AnchorStatus::Ok;
  std::size_t evaluations = 0;  // query evaluations performed
};

struct ResolveOptions {
  // Ranges holding uncommitted suggestions; anchors inside them are flagged.
  std::vector<ByteRange> suggestionRanges;
};

namespace detail {

/// SchemaSets for every keypath of a tree, computed by stepping from the
/// parent path and memoized.
class SchemaSetCache {
 public:
  SchemaSetCache(const SyntaxTree& tree, SchemaPtr schema) : tree_(tree), schema_(std::move(schema)) {}

  const SchemaSet& at(const KeyPath& path) {
    std::string key = path.toString();
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    SchemaSet set;
    if (schema_) {
      if (path.steps().empty()) set = inferSchemaSet(tree_, schema_, path);
      else set = stepSchemaSet(schema_, at(path.parent()), path.steps().back());
    }
    return memo_.emplace(std::move(key), std::move(set)).first->second;
  }

 private:
  const SyntaxTree& tree_;
  SchemaPtr schema_;
  std::map<std::string, SchemaSet> memo_;
};

}  // namespace detail

/// Nodes that views can attach to: those a keypath addresses exactly.
inline bool addressable(const SyntaxTree& tree, const CstNode& n, const KeyPath& path) {
  if (isComment(n.kind) || n.kind == NodeKind::Property || n.punctuation) return false;
  return resolveKeyPath(tree, path) == &n;
}

/// One pre-order pass over the tree evaluating every view on every node.
inline AnchorResult resolveAnchors(const SyntaxTree& tree, const SchemaPtr& schema, const ViewRegistry& registry,
                                   const ResolveOptions& options = {}) {
  AnchorResult result;
  if (tree.root().kind == NodeKind::Error) {
    result.status = AnchorStatus::ViewsDeactivated;
    return result;
  }
  detail::SchemaSetCache sets(tree, schema);
  static const SchemaSet kEmpty;
  const auto& views = registry.views();
  // Paths and addressability are carried down instead of recomputed.
  struct Item {
    NodeId id;
    KeyPath path;
    bool addressable;
  };
  std::vector<Item> stack{{tree.root().id, KeyPath{}, true}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const CstNode& n = tree.node(item.id);
    const KeyPath& path = item.path;
    std::vector<Item> kids;
    if (n.kind == NodeKind::Object) {
      std::set<std::string> seen;
      for (NodeId c : n.children) {
        const CstNode& ch = tree.node(c);
        if (ch.kind == NodeKind::Property) {
          const std::string& name = tree.propertyName(ch).decoded;
          kids.push_back({c, path.child(Key{name}), item.addressable && seen.insert(name).second});
        } else {
          kids.push_back({c, path, false});
        }
      }
    } else if (n.kind == NodeKind::Property) {
      for (NodeId c : n.children) {
        const CstNode& ch = tree.node(c);
        if (ch.kind == NodeKind::PropertyName) kids.push_back({c, path.parent().child(KeyName{ch.decoded}), item.addressable});
        else if (isComment(ch.kind) || ch.punctuation) kids.push_back({c, path, false});
        else kids.push_back({c, path, item.addressable});
      }
    } else if (n.kind == NodeKind::Array) {
      std::size_t index = 0;
      for (NodeId c : n.children) {
        const CstNode& ch = tree.node(c);
        if (isComment(ch.kind) || ch.punctuation) kids.push_back({c, path, false});
        else kids.push_back({c, path.child(Index{index++}), item.addressable});
      }
    } else {
      for (NodeId c : n.children) kids.push_back({c, path, false});
    }
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));

    bool attachable = item.addressable && n.kind != NodeKind::Property && !isComment(n.kind) && !n.punctuation &&
                      !tree.insideError(n);
    std::vector<const ViewSpec*> hits;
    const ViewSpec* replace = nullptr;
    for (const auto& v : views) {
      ++result.evaluations;
      const SchemaSet& set = v.query.needsSchemaSet() && attachable ? sets.at(path) : kEmpty;
      if (!matches(v.query, tree, n, path, set)) continue;
      if (v.placement == Placement::Replace) {
        if (!replace || v.registrationIndex > replace->registrationIndex) replace = &v;
      } else {
        hits.push_back(&v);
      }
    }
    if (!attachable) continue;
    if (replace) hits.push_back(replace);
    std::sort(hits.begin(), hits.end(), [](const ViewSpec* a, const ViewSpec* b) { return a->registrationIndex < b->registrationIndex; });
    if (hits.empty()) continue;
    const SchemaSet& set = schema ? sets.at(path) : kEmpty;
    ByteRange range = tree.valueRange(n);
    bool flagged = std::any_of(options.suggestionRanges.begin(), options.suggestionRanges.end(),
                               [&](const ByteRange& r) { return r.start <= range.start && range.end <= r.end; });
    for (const ViewSpec* v : hits) {
      Anchor a;
      a.viewId = v->id;
      a.nodeRange = range;
      a.keyPath = path;
      a.placement = v->placement;
      a.nodeKind = n.kind;
      a.nodeText = std::string(tree.valueText(n));
      a.schemaNames = set.names();
      a.suggestionFlag = flagged;
      a.widget = v->widget;
      a.registrationIndex = v->registrationIndex;
      if (v->payload) a.extra = v->payload(ViewContext{tree, n, path, set});
      result.anchors.push_back(std::move(a));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Built-in views

namespace detail {

inline double numberOf(const SyntaxTree& tree, const CstNode& n) {
  Json v = toJson(tree, n);
  return v.is_number() ? v.get<double>() : 0.0;
}

inline Json niceNumber(double d) {
  if (std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  return d;
}

}  // namespace detail

/// Replaces quoted tokens (property names and strings) by their unquoted text.
inline ViewSpec quietQuoteView(std::string id = "quietQuote") {
  ViewSpec v;
  v.id = std::move(id);
  v.placement = Placement::Replace;
  v.query = Query::syntaxNode({NodeKind::PropertyName, NodeKind::String});
  v.widget = {"quietQuote", "", Json::object()};
  v.payload = [](const ViewContext& c) { return Json{{"text", c.node.decoded}}; };
  return v;
}

/// The preamble of common views. Remove any of them by id.
inline std::vector<ViewSpec> builtinViews() {
  std::vector<ViewSpec> out;
  {
    ViewSpec v;
    v.id = "booleanToggle";
    v.placement = Placement::InlinePrefix;
    v.query = Query::syntaxNode({NodeKind::True, NodeKind::False});
    v.widget = {"booleanToggle", "", Json::object()};
    v.payload = [](const ViewContext& c) { return Json{{"value", c.node.kind == NodeKind::True}}; };
    out.push_back(std::move(v));
  }
  auto colorQuery = [] {
    return Query::anyOf({Query::regex({R"(^"#[0-9a-fA-F]{6}"$)"}), Query::predicate("cssColorName")});
  };
  auto colorPayload = [](const ViewContext& c) { return Json{{"color", c.node.decoded}}; };
  {
    ViewSpec v;
    v.id = "colorChip";
    v.placement = Placement::InlinePrefix;
    v.query = colorQuery();
    v.widget = {"colorChip", "", Json::object()};
    v.payload = colorPayload;
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "colorPicker";
    v.placement = Placement::Menu;
    v.query = colorQuery();
    v.widget = {"colorPicker", "", Json::object()};
    v.payload = colorPayload;
    v.menuLabel = "Pick color";
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "numberSlider";
    v.placement = Placement::InlineSuffix;
    v.query = Query::syntaxNode({NodeKind::Number});
    v.widget = {"numberSlider", "", Json::object()};
    v.payload = [](const ViewContext& c) {
      double value = detail::numberOf(c.tree, c.node);
      std::optional<double> lo, hi;
      for (const auto& e : c.schemaSet.entries) {
        if (!lo && e.def->minimum) lo = e.def->minimum;
        if (!hi && e.def->maximum) hi = e.def->maximum;
      }
      double mn = lo.value_or(value - std::abs(value) - 10);
      double mx = hi.value_or(value + std::abs(value) + 10);
      if (mx < mn) mx = mn;
      bool integral = std::floor(value) == value && std::floor(mn) == mn && std::floor(mx) == mx;
      double step = integral ? 1.0 : (mx > mn ? (mx - mn) / 100.0 : 0.01);
      return Json{{"value", detail::niceNumber(value)}, {"min", detail::niceNumber(mn)},
                  {"max", detail::niceNumber(mx)}, {"step", detail::niceNumber(step)}};
    };
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "picklist";
    v.placement = Placement::InlineSuffix;
    v.query = Query::predicate("hasEnum");
    v.widget = {"picklist", "", Json::object()};
    v.payload = [](const ViewContext& c) {
      Json options = Json::array();
      for (const auto& e : c.schemaSet.entries)
        if (e.def->enumValues)
          for (const auto& o : *e.def->enumValues)
            if (std::none_of(options.begin(), options.end(), [&](const Json& x) { return jsonEqual(x, o); })) options.push_back(o);
      return Json{{"options", options}};
    };
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "sparkSummary";
    v.placement = Placement::Replace;
    v.query = Query::predicate("numericArray");
    v.widget = {"sparkSummary", "", Json::object()};
    v.payload = [](const ViewContext& c) {
      auto members = c.tree.members(c.node);
      double mn = 0, mx = 0, sum = 0;
      Json values = Json::array();
      for (std::size_t i = 0; i < members.size(); ++i) {
        double d = detail::numberOf(c.tree, c.tree.node(members[i]));
        mn = i ? std::min(mn, d) : d;
        mx = i ? std::max(mx, d) : d;
        sum += d;
        values.push_back(detail::niceNumber(d));
      }
      return Json{{"min", detail::niceNumber(mn)}, {"mean", detail::niceNumber(sum / static_cast<double>(members.size()))},
                  {"max", detail::niceNumber(mx)}, {"count", members.size()}, {"values", values}};
    };
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "objectSorter";
    v.placement = Placement::Menu;
    v.query = Query::syntaxNode({NodeKind::Object});
    v.widget = {"objectSorter", "", Json::object()};
    v.menuLabel = "Sort keys";
    v.menuAction = [](const ViewContext& c) -> std::optional<EditAction> {
      if (c.tree.members(c.node).size() < 2) return std::nullopt;
      return EditAction::sortObjectKeys(c.path);
    };
    out.push_back(std::move(v));
  }
  {
    ViewSpec v;
    v.id = "formatter";
    v.placement = Placement::Menu;
    v.query = Query::syntaxNode({NodeKind::Object, NodeKind::Array});
    v.widget = {"formatter", "", Json::object()};
    v.menuLabel = "Format document";
    v.menuAction = [](const ViewContext&) -> std::optional<EditAction> { return EditAction::formatDocument(); };
    out.push_back(std::move(v));
  }
  return out;
}

/// A registry holding the builtin views minus `removed` ids.
inline ViewRegistry builtinRegistry(const std::vector<std::string>& removed = {}) {
  ViewRegistry r;
  for (auto& v : builtinViews())
    if (std::find(removed.begin(), removed.end(), v.id) == removed.end()) r = r.with(std::move(v));
  return r;
}

}  // namespace projedit
