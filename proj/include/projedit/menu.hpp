#pragma once

// Cursor menus, incomplete-string filtering and schema search.

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "projedit/edit.hpp"
#include "projedit/jsonc.hpp"
#include "projedit/projection.hpp"
#include "projedit/schema.hpp"

namespace projedit {

enum class MenuGroup { Structural, SchemaProperty, SchemaValue, TypeSwitch, View };

inline std::string_view menuGroupName(MenuGroup g) {
  switch (g) {
    case MenuGroup::Structural: return "structural";
    case MenuGroup::SchemaProperty: return "schemaProperty";
    case MenuGroup::SchemaValue: return "schemaValue";
    case MenuGroup::TypeSwitch: return "typeSwitch";
    case MenuGroup::View: return "view";
  }
  return "?";
}

struct MenuItem {
  std::string label;
  std::optional<std::string> detail;
  std::optional<EditAction> action;
  MenuGroup group = MenuGroup::Structural;
  std::string sortKey;

  Json toJson() const {
    Json j{{"label", label}, {"group", menuGroupName(group)}, {"sortKey", sortKey}};
    if (detail) j["detail"] = *detail;
    if (action) j["action"] = action->toJson();
    return j;
  }
  friend bool operator==(const MenuItem& a, const MenuItem& b) { return a.toJson() == b.toJson(); }
};

struct Menu {
  KeyPath anchorPath;
  std::vector<MenuItem> items;
  Json typeInfo = Json::object();

  Json toJson() const {
    Json items_ = Json::array();
    for (const auto& i : items) items_.push_back(i.toJson());
    return {{"anchorPath", anchorPath.toJson()}, {"items", items_}, {"typeInfo", typeInfo}};
  }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string valueLabel(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline Json defaultOfType(std::string_view t) {
  if (t == "object") return Json::object();
  if (t == "array") return Json::array();
  if (t == "string") return "";
  if (t == "number" || t == "integer") return 0;
  if (t == "boolean") return false;
  return nullptr;
}

inline std::optional<std::string> describe(const SchemaSet& set) {
  for (const auto& e : set.entries) {
    if (e.def->description) return e.def->description;
    if (e.def->title) return e.def->title;
  }
  return std::nullopt;
}

/// Minimal value satisfying every entry of `set` at once (first entry when
/// the conjunction cannot be synthesized).
inline Json synthesizeFor(const SchemaSet& set) {
  if (set.empty()) return nullptr;
  SchemaNodeDef all;
  all.pointer = set.entries.front().def->pointer;
  for (const auto& e : set.entries)
    if (e.viaBranch.empty()) all.allOf.push_back(e.def.get());
  if (all.allOf.empty()) return synthesizeMinimal(*set.entries.front().def).value;
  return synthesizeMinimal(all).value;
}

class MenuBuilder {
 public:
  MenuBuilder(const SyntaxTree& tree, const SchemaPtr& schema, const ViewRegistry& views)
      : tree_(tree), schema_(schema), views_(views) {}

  Menu build(std::size_t offset) {
    const CstNode* n = &nodeAt(tree_, offset);
    bool errorMode = n->kind == NodeKind::Error || tree_.insideError(*n);
    if (n->punctuation || isComment(n->kind)) {
      if (n->parent != kNoNode) n = &tree_.node(n->parent);
    }
    if (n->kind == NodeKind::Property) n = &tree_.propertyValue(*n);
    while (n->parent != kNoNode && (n->kind == NodeKind::Error || tree_.insideError(*n) || !addressable(*n)))
      n = &tree_.node(n->parent);
    if (n->kind == NodeKind::Property) n = &tree_.propertyValue(*n);

    Menu menu;
    menu.anchorPath = keyPathOf(tree_, *n);
    KeyPath valuePath = menu.anchorPath.valuePath();
    SchemaSet set = schema_ ? inferSchemaSet(tree_, schema_, valuePath) : SchemaSet{};
    menu.typeInfo = typeInfo(set);

    structural(*n, valuePath, set);
    if (!errorMode && n->kind != NodeKind::Error) {
      if (n->kind == NodeKind::PropertyName) {
        renames(*n, menu.anchorPath);
      } else {
        if (n->kind == NodeKind::Object) properties(*n, valuePath, set);
        values(*n, valuePath, set);
        typeSwitch(*n, valuePath, set);
        viewItems(*n, valuePath, set);
      }
    }
    std::stable_sort(items_.begin(), items_.end(), [](const MenuItem& a, const MenuItem& b) {
      if (a.group != b.group) return a.group < b.group;
      return a.sortKey < b.sortKey;
    });
    menu.items = std::move(items_);
    return menu;
  }

 private:
  bool addressable(const CstNode& n) const {
    if (n.punctuation || isComment(n.kind) || n.kind == NodeKind::Property) return false;
    return resolveKeyPath(tree_, keyPathOf(tree_, n)) == &n;
  }

  static Json typeInfo(const SchemaSet& set) {
    Json j{{"schemas", set.names()}, {"types", set.typeUnion()}};
    if (auto d = describe(set)) j["description"] = *d;
    if (!set.warnings.empty()) j["warnings"] = set.warnings;
    return j;
  }

  // Keeps the item only if its action compiles to a non-empty change.
  void add(MenuItem item) {
    if (item.action) {
      try {
        if (compile(tree_, *item.action).empty()) return;
      } catch (const Error&) {
        return;
      }
      item.action->label = item.label;
    }
    if (item.sortKey.empty()) item.sortKey = lower(item.label);
    if (std::any_of(items_.begin(), items_.end(),
                    [&](const MenuItem& m) { return m.group == item.group && m.label == item.label; }))
      return;
    items_.push_back(std::move(item));
  }

  void addAction(MenuGroup g, std::string label, std::optional<std::string> detail, EditAction a, ActionSource src) {
    a.source = src;
    add(MenuItem{std::move(label), std::move(detail), std::move(a), g, ""});
  }

  void structural(const CstNode& n, const KeyPath& path, const SchemaSet& set) {
    auto S = MenuGroup::Structural;
    auto P = ActionSource::ParseTree;
    if (!path.empty()) {
      addAction(S, "Delete", std::nullopt, EditAction::deleteNode(path), P);
      addAction(S, "Duplicate", std::nullopt, EditAction::duplicateNode(path), P);
      addAction(S, "Move up", std::nullopt, EditAction::moveSibling(path, -1), P);
      addAction(S, "Move down", std::nullopt, EditAction::moveSibling(path, +1), P);
    }
    if (n.kind == NodeKind::Array) {
      Json item = schema_ ? synthesizeFor(stepSchemaSet(schema_, set, Index{0})) : Json(nullptr);
      addAction(S, "Add element", std::nullopt, EditAction::insertArrayElement(path, tree_.members(n).size(), item), P);
    }
    if (n.kind == NodeKind::Object) {
      std::string name = "key";
      for (int i = 2; hasKey(n, name); ++i) name = "key" + std::to_string(i);
      addAction(S, "Add property", std::nullopt, EditAction::insertProperty(path, name, nullptr), P);
    }
  }

  bool hasKey(const CstNode& obj, std::string_view name) const {
    for (NodeId m : tree_.members(obj))
      if (tree_.propertyName(tree_.node(m)).decoded == name) return true;
    return false;
  }

  std::vector<std::string> declaredNames(const SchemaSet& set) const {
    std::vector<std::string> out;
    for (const auto& e : set.entries)
      for (const auto& [name, def] : e.def->properties)
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    return out;
  }

  void properties(const CstNode& obj, const KeyPath& path, const SchemaSet& set) {
    for (const auto& name : declaredNames(set)) {
      if (hasKey(obj, name)) continue;
      SchemaSet child = stepSchemaSet(schema_, set, Key{name});
      addAction(MenuGroup::SchemaProperty, name, describe(child), EditAction::insertProperty(path, name, synthesizeFor(child)),
                ActionSource::Schema);
    }
  }

  void renames(const CstNode& nameNode, const KeyPath& namePath) {
    if (!schema_) return;
    KeyPath objPath = namePath.parent();
    const CstNode& obj = tree_.node(tree_.node(nameNode.parent).parent);
    SchemaSet set = inferSchemaSet(tree_, schema_, objPath);
    for (const auto& name : declaredNames(set)) {
      if (hasKey(obj, name)) continue;
      addAction(MenuGroup::SchemaProperty, name, describe(stepSchemaSet(schema_, set, Key{name})),
                EditAction::renameKey(namePath, name), ActionSource::Schema);
    }
  }

  void values(const CstNode&, const KeyPath& path, const SchemaSet& set) {
    for (const auto& e : set.entries) {
      std::vector<Json> options;
      if (e.def->constValue) options.push_back(*e.def->constValue);
      if (e.def->enumValues) options.insert(options.end(), e.def->enumValues->begin(), e.def->enumValues->end());
      for (const auto& o : options)
        addAction(MenuGroup::SchemaValue, valueLabel(o), "value of " + e.name, EditAction::replaceValue(path, o),
                  ActionSource::Schema);
    }
    for (const auto& e : set.entries) {
      if (e.viaBranch.empty()) continue;
      auto r = synthesizeMinimal(*e.def);
      std::string label = "Insert " + e.name;
      addAction(MenuGroup::SchemaValue, label, e.def->description, EditAction::replaceValue(path, r.value), ActionSource::Schema);
    }
  }

  void typeSwitch(const CstNode& n, const KeyPath& path, const SchemaSet& set) {
    std::string current;
    switch (n.kind) {
      case NodeKind::Object: current = "object"; break;
      case NodeKind::Array: current = "array"; break;
      case NodeKind::String: current = "string"; break;
      case NodeKind::Number: current = "number"; break;
      case NodeKind::True:
      case NodeKind::False: current = "boolean"; break;
      case NodeKind::Null: current = "null"; break;
      default: break;
    }
    for (const auto& t : set.typeUnion()) {
      std::optional<std::string> detail;
      if (t == current) detail = "current type";
      addAction(MenuGroup::TypeSwitch, "As " + t, detail, EditAction::replaceValue(path, defaultOfType(t)), ActionSource::Schema);
    }
  }

  void viewItems(const CstNode& n, const KeyPath& path, const SchemaSet& set) {
    for (const auto& v : views_.views()) {
      if (v.placement != Placement::Menu) continue;
      if (!matches(v.query, tree_, n, path, set)) continue;
      ViewContext ctx{tree_, n, path, set};
      MenuItem item{v.menuLabel.empty() ? v.id : v.menuLabel, "view " + v.id, std::nullopt, MenuGroup::View, ""};
      if (v.menuAction) {
        auto a = v.menuAction(ctx);
        if (!a) continue;
        a->source = ActionSource::View;
        item.action = std::move(*a);
      }
      add(std::move(item));
    }
  }

  const SyntaxTree& tree_;
  const SchemaPtr& schema_;
  const ViewRegistry& views_;
  std::vector<MenuItem> items_;
};

}  // namespace detail

/// The menu for a cursor at byte `offset`.
inline Menu menuFor(const SyntaxTree& tree, const SchemaPtr& schema, const ViewRegistry& views, std::size_t offset) {
  return detail::MenuBuilder(tree, schema, views).build(offset);
}

/// Keeps items whose label or detail contains `query` (case-insensitively),
/// ranked label-prefix, label-substring, detail-prefix, detail-substring.
inline Menu filterMenu(const Menu& menu, std::string_view query) {
  if (query.empty()) return menu;
  std::string q = detail::lower(query);
  auto tier = [&](const MenuItem& item) -> int {
    std::string label = detail::lower(item.label);
    auto at = label.find(q);
    if (at == 0) return 0;
    if (at != std::string::npos) return 1;
    if (item.detail) {
      std::string d = detail::lower(*item.detail);
      at = d.find(q);
      if (at == 0) return 2;
      if (at != std::string::npos) return 3;
    }
    return -1;
  };
  std::vector<std::pair<int, const MenuItem*>> kept;
  for (const auto& item : menu.items)
    if (int t = tier(item); t >= 0) kept.push_back({t, &item});
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second->group != b.second->group) return a.second->group < b.second->group;
    return a.second->sortKey < b.second->sortKey;
  });
  Menu out;
  out.anchorPath = menu.anchorPath;
  out.typeInfo = menu.typeInfo;
  for (const auto& [t, item] : kept) out.items.push_back(*item);
  return out;
}

/// The partial word before the cursor when it sits in a string, a property
/// name or an error token.
inline std::string extractQueryAtCursor(const SyntaxTree& tree, std::size_t offset) {
  const CstNode* at = &nodeAt(tree, offset);
  if (at->kind != NodeKind::String && at->kind != NodeKind::PropertyName && at->kind != NodeKind::Error && offset > 0) {
    // a synthesized closer at end of input hides the token just before it
    const CstNode& before = nodeAt(tree, offset - 1);
    if (before.kind == NodeKind::Error && before.range.end == offset) at = &before;
  }
  const CstNode& n = *at;
  const std::string& text = tree.text();
  if (n.kind == NodeKind::String || n.kind == NodeKind::PropertyName) {
    if (offset <= n.range.start) return "";
    std::size_t end = std::min(offset, n.range.end);
    bool closed = n.range.size() >= 2 && text[n.range.end - 1] == '"';
    if (closed && end == n.range.end) --end;
    return end > n.range.start + 1 ? text.substr(n.range.start + 1, end - n.range.start - 1) : "";
  }
  if (n.kind == NodeKind::Error) {
    std::size_t start = offset;
    auto stop = [](char c) {
      return c == '"' || c == '{' || c == '}' || c == '[' || c == ']' || c == ',' || c == ':' || c == ' ' || c == '\t' ||
             c == '\n' || c == '\r';
    };
    while (start > n.range.start && !stop(text[start - 1])) --start;
    return text.substr(start, offset - start);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Schema search

struct SearchSuggestion {
  std::vector<std::string> matchedPath;  // property names; "[]" steps into array items
  Json snippet;
  KeyPath insertionPath;
  EditAction action;
  std::size_t depth = 0;
  std::string matchedOn;  // name | title | description | enum

  Json toJson() const {
    return {{"matchedPath", matchedPath}, {"snippet", snippet}, {"insertionPath", insertionPath.toJson()},
            {"action", action.toJson()}, {"score", {{"depth", depth}, {"path", joinedPath()}}}, {"matchedOn", matchedOn}};
  }
  std::string joinedPath() const {
    std::string s;
    for (std::size_t i = 0; i < matchedPath.size(); ++i) s += (i ? "." : "") + matchedPath[i];
    return s;
  }
};

inline constexpr std::size_t kSearchDepthLimit = 12;

namespace detail {

class SchemaSearcher {
 public:
  SchemaSearcher(const SchemaPtr& schema, std::string query) : schema_(schema), q_(lower(query)) {}

  struct Hit {
    std::vector<std::string> path;
    SchemaSet set;
    std::optional<Json> enumValue;
    std::string on;
  };

  std::vector<Hit> run() {
    std::set<const SchemaNodeDef*> onPath;
    visit(expandSchema(schema_, schema_->root()), {}, onPath);
    return std::move(hits_);
  }

 private:
  bool contains(std::string_view s) const { return lower(s).find(q_) != std::string::npos; }

  void consider(const std::vector<std::string>& path, const SchemaSet& set) {
    if (path.empty()) return;
    const std::string& last = path.back();
    std::optional<Json> enumValue;
    std::string on;
    if (last != "[]" && contains(last)) on = "name";
    for (const auto& e : set.entries) {
      if (on.empty() && e.def->title && contains(*e.def->title)) on = "title";
      if (on.empty() && e.def->description && contains(*e.def->description)) on = "description";
      if (!enumValue && e.def->enumValues)
        for (const auto& v : *e.def->enumValues)
          if (contains(valueLabel(v))) {
            enumValue = v;
            break;
          }
    }
    if (enumValue) on = "enum";
    if (on.empty()) return;
    hits_.push_back({path, set, enumValue, on});
  }

  void visit(const SchemaSet& set, std::vector<std::string> path, std::set<const SchemaNodeDef*>& onPath) {
    if (path.size() >= kSearchDepthLimit) return;
    std::vector<const SchemaNodeDef*> added;
    std::vector<const SchemaSetEntry*> fresh;
    for (const auto& e : set.entries) {
      const SchemaNodeDef* id = e.def->identity();
      if (onPath.count(id)) continue;
      onPath.insert(id);
      added.push_back(id);
      fresh.push_back(&e);
    }
    SchemaSet live;
    for (const auto* e : fresh) live.entries.push_back(*e);
    std::vector<std::string> names;
    bool hasItems = false;
    for (const auto* e : fresh) {
      for (const auto& [name, def] : e->def->properties)
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      hasItems = hasItems || !e->def->items.empty();
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      SchemaSet child = stepSchemaSet(schema_, live, Key{name});
      path.push_back(name);
      consider(path, child);
      visit(child, path, onPath);
      path.pop_back();
    }
    if (hasItems) {
      SchemaSet child = stepSchemaSet(schema_, live, Index{0});
      path.push_back("[]");
      consider(path, child);
      visit(child, path, onPath);
      path.pop_back();
    }
    for (const auto* id : added) onPath.erase(id);
  }

  const SchemaPtr& schema_;
  std::string q_;
  std::vector<Hit> hits_;
};

}  // namespace detail

/// Matches `query` against property names, titles, descriptions and enum
/// members reachable from the schema root; each hit becomes an insertable
/// snippet rooted at the deepest part of the path already in the document.
inline std::vector<SearchSuggestion> schemaSearch(const SyntaxTree& tree, const SchemaPtr& schema, std::string_view query,
                                                  std::size_t limit) {
  std::vector<SearchSuggestion> out;
  if (query.empty() || limit == 0 || !schema) return out;
  auto hits = detail::SchemaSearcher(schema, std::string(query)).run();

  // One suggestion per path; an enum match wins over the others.
  std::map<std::vector<std::string>, const detail::SchemaSearcher::Hit*> best;
  for (const auto& h : hits) {
    auto [it, fresh] = best.emplace(h.path, &h);
    if (!fresh && !it->second->enumValue && h.enumValue) it->second = &h;
  }

  for (const auto& [path, hit] : best) {
    SearchSuggestion s;
    s.matchedPath = path;
    s.depth = path.size();
    s.matchedOn = hit->on;
    Json leaf = hit->enumValue ? *hit->enumValue : detail::synthesizeFor(hit->set);

    // Walk the document as far as the path exists.
    const CstNode* node = &tree.root();
    KeyPath docPath;
    std::size_t i = 0;
    for (; i < path.size(); ++i) {
      const CstNode* next = nullptr;
      KeyPath stepPath;
      if (path[i] == "[]") break;  // a fresh element is always appended
      if (node->kind != NodeKind::Object) break;
      stepPath = docPath.child(Key{path[i]});
      next = resolveKeyPath(tree, stepPath);
      if (!next || next->kind == NodeKind::Error || next->kind == NodeKind::Missing) break;
      node = next;
      docPath = stepPath;
    }
    Json value = leaf;
    for (std::size_t j = path.size(); j-- > i + 1;) value = path[j] == "[]" ? Json::array({value}) : Json{{path[j], value}};

    s.insertionPath = docPath;
    bool kindFits = i < path.size() && ((path[i] == "[]" && node->kind == NodeKind::Array) ||
                                        (path[i] != "[]" && node->kind == NodeKind::Object));
    if (i == path.size()) {
      s.snippet = leaf;
      s.action = EditAction::replaceValue(docPath, leaf);
    } else if (kindFits && path[i] == "[]") {
      s.snippet = value;
      s.action = EditAction::insertArrayElement(docPath, tree.members(*node).size(), value);
    } else if (kindFits) {
      const CstNode* existing = resolveKeyPath(tree, docPath.child(Key{path[i]}));
      if (existing) {
        // present but unusable (missing value or error): overwrite it
        s.snippet = value;
        s.insertionPath = docPath.child(Key{path[i]});
        s.action = EditAction::replaceValue(s.insertionPath, value);
      } else {
        s.snippet = value;
        s.action = EditAction::insertProperty(docPath, path[i], value);
      }
    } else {
      Json whole = path[i] == "[]" ? Json::array({value}) : Json{{path[i], value}};
      s.snippet = whole;
      s.action = EditAction::replaceValue(docPath, whole);
    }
    s.action.label = "Insert " + s.joinedPath();
    s.action.source = ActionSource::Schema;
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const SearchSuggestion& a, const SearchSuggestion& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.joinedPath() < b.joinedPath();
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace projedit
