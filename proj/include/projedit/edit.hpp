#pragma once

// Structural edit intents compiled to minimal text edits. Edits keep the
// surrounding formatting: separators follow neighbouring members, inserted
// JSON is printed inline or indented to match its container.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "projedit/error.hpp"
#include "projedit/jsonc.hpp"

namespace projedit {

struct TextEdit {
  ByteRange range;
  std::string newText;

  friend bool operator==(const TextEdit&, const TextEdit&) = default;

  Json toJson() const { return Json{{"start", range.start}, {"end", range.end}, {"newText", newText}}; }
  static TextEdit fromJson(const Json& j) {
    try {
      return {{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()}, j.at("newText").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidParams, std::string("bad text edit: ") + e.what());
    }
  }
};

enum class ActionKind {
  InsertProperty,
  InsertArrayElement,
  DeleteNode,
  DuplicateNode,
  MoveSibling,
  ReplaceValue,
  RenameKey,
  SortObjectKeys,
  FormatDocument,
};

inline std::string_view actionKindName(ActionKind k) {
  switch (k) {
    case ActionKind::InsertProperty: return "InsertProperty";
    case ActionKind::InsertArrayElement: return "InsertArrayElement";
    case ActionKind::DeleteNode: return "DeleteNode";
    case ActionKind::DuplicateNode: return "DuplicateNode";
    case ActionKind::MoveSibling: return "MoveSibling";
    case ActionKind::ReplaceValue: return "ReplaceValue";
    case ActionKind::RenameKey: return "RenameKey";
    case ActionKind::SortObjectKeys: return "SortObjectKeys";
    case ActionKind::FormatDocument: return "FormatDocument";
  }
  return "?";
}

enum class ActionSource { ParseTree, Schema, View };

inline std::string_view actionSourceName(ActionSource s) {
  switch (s) {
    case ActionSource::ParseTree: return "parseTree";
    case ActionSource::Schema: return "schema";
    case ActionSource::View: return "view";
  }
  return "?";
}

struct EditAction {
  ActionKind kind = ActionKind::FormatDocument;
  // Target node. For the two insert kinds this is the container.
  KeyPath path;
  std::string name;       // InsertProperty, RenameKey
  Json value;             // InsertProperty, InsertArrayElement, ReplaceValue
  std::size_t index = 0;  // InsertArrayElement
  int direction = 0;      // MoveSibling: -1 or +1
  std::string label;
  ActionSource source = ActionSource::ParseTree;

  static EditAction make(ActionKind k, KeyPath p) {
    EditAction a;
    a.kind = k;
    a.path = std::move(p);
    return a;
  }
  static EditAction insertProperty(KeyPath object, std::string name, Json value) {
    EditAction a = make(ActionKind::InsertProperty, std::move(object));
    a.name = std::move(name);
    a.value = std::move(value);
    return a;
  }
  static EditAction insertArrayElement(KeyPath array, std::size_t index, Json value) {
    EditAction a = make(ActionKind::InsertArrayElement, std::move(array));
    a.index = index;
    a.value = std::move(value);
    return a;
  }
  static EditAction deleteNode(KeyPath p) { return make(ActionKind::DeleteNode, std::move(p)); }
  static EditAction duplicateNode(KeyPath p) { return make(ActionKind::DuplicateNode, std::move(p)); }
  static EditAction moveSibling(KeyPath p, int direction) {
    EditAction a = make(ActionKind::MoveSibling, std::move(p));
    a.direction = direction;
    return a;
  }
  static EditAction replaceValue(KeyPath p, Json value) {
    EditAction a = make(ActionKind::ReplaceValue, std::move(p));
    a.value = std::move(value);
    return a;
  }
  static EditAction renameKey(KeyPath p, std::string newName) {
    EditAction a = make(ActionKind::RenameKey, std::move(p));
    a.name = std::move(newName);
    return a;
  }
  static EditAction sortObjectKeys(KeyPath p) { return make(ActionKind::SortObjectKeys, std::move(p)); }
  static EditAction formatDocument() { return make(ActionKind::FormatDocument, {}); }

  EditAction& withLabel(std::string l, ActionSource s) {
    label = std::move(l);
    source = s;
    return *this;
  }

  Json toJson() const {
    Json j{{"kind", actionKindName(kind)}, {"path", path.toJson()}};
    switch (kind) {
      case ActionKind::InsertProperty: j["name"] = name; j["value"] = value; break;
      case ActionKind::InsertArrayElement: j["index"] = index; j["value"] = value; break;
      case ActionKind::ReplaceValue: j["value"] = value; break;
      case ActionKind::RenameKey: j["name"] = name; break;
      case ActionKind::MoveSibling: j["direction"] = direction; break;
      default: break;
    }
    j["label"] = label;
    j["source"] = actionSourceName(source);
    return j;
  }

  static EditAction fromJson(const Json& j) {
    static const std::vector<ActionKind> kinds = {
        ActionKind::InsertProperty, ActionKind::InsertArrayElement, ActionKind::DeleteNode,
        ActionKind::DuplicateNode,  ActionKind::MoveSibling,        ActionKind::ReplaceValue,
        ActionKind::RenameKey,      ActionKind::SortObjectKeys,     ActionKind::FormatDocument};
    try {
      EditAction a;
      std::string k = j.at("kind").get<std::string>();
      auto it = std::find_if(kinds.begin(), kinds.end(), [&](ActionKind c) { return actionKindName(c) == k; });
      if (it == kinds.end()) throw Error(ErrorCode::InvalidParams, "unknown action kind '" + k + "'");
      a.kind = *it;
      if (j.contains("path")) a.path = KeyPath::fromJson(j["path"]);
      if (j.contains("name")) a.name = j["name"].get<std::string>();
      if (j.contains("value")) a.value = j["value"];
      if (j.contains("index")) a.index = j["index"].get<std::size_t>();
      if (j.contains("direction")) a.direction = j["direction"].get<int>();
      if (j.contains("label")) a.label = j["label"].get<std::string>();
      std::string src = j.value("source", "parseTree");
      a.source = src == "schema" ? ActionSource::Schema : src == "view" ? ActionSource::View : ActionSource::ParseTree;
      return a;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidParams, std::string("bad edit action: ") + e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// apply

/// Splices non-overlapping edits into `text`, right to left. Two insertions at
/// the same offset count as overlapping.
inline std::string apply(std::string text, std::vector<TextEdit> edits) {
  std::stable_sort(edits.begin(), edits.end(),
                   [](const TextEdit& a, const TextEdit& b) { return a.range.start < b.range.start; });
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const auto& r = edits[i].range;
    if (r.start > r.end || r.end > text.size())
      throw Error(ErrorCode::Offset, "edit range [" + std::to_string(r.start) + ", " + std::to_string(r.end) + ") out of bounds");
    if (i > 0) {
      const auto& prev = edits[i - 1].range;
      if (prev.end > r.start || prev.start == r.start)
        throw Error(ErrorCode::EditConflict, "edits overlap at offset " + std::to_string(r.start));
    }
  }
  for (auto it = edits.rbegin(); it != edits.rend(); ++it)
    text.replace(it->range.start, it->range.size(), it->newText);
  return text;
}

// ---------------------------------------------------------------------------
// JSON printing

/// `{"a": 1, "b": [1, 2]}` style.
inline std::string printInline(const Json& v) {
  if (v.is_object()) {
    if (v.empty()) return "{}";
    std::string out = "{";
    bool first = true;
    for (const auto& [k, x] : v.items()) {
      if (!first) out += ", ";
      first = false;
      out += Json(k).dump() + ": " + printInline(x);
    }
    return out + "}";
  }
  if (v.is_array()) {
    if (v.empty()) return "[]";
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + printInline(v[i]);
    return out + "]";
  }
  return v.dump();
}

/// Two-space pretty print; continuation lines are prefixed with `indent`.
inline std::string printPretty(const Json& v, std::string_view indent) {
  std::string raw = v.dump(2);
  std::string out;
  for (char c : raw) {
    out += c;
    if (c == '\n') out += indent;
  }
  return out;
}

// ---------------------------------------------------------------------------
// compile

namespace detail {

inline bool isWs(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class EditCompiler {
 public:
  EditCompiler(const SyntaxTree& tree, std::vector<std::string>* warnings) : tree_(tree), text_(tree.text()), warnings_(warnings) {}

  std::vector<TextEdit> compile(const EditAction& a) {
    switch (a.kind) {
      case ActionKind::InsertProperty: {
        const CstNode& obj = container(a.path, NodeKind::Object);
        std::string indent = memberIndent(obj);
        std::string entry = Json(a.name).dump() + ": " + printValue(a.value, obj, indent);
        if (hasKey(obj, a.name, nullptr)) warn("property '" + a.name + "' already exists; the document now has a duplicate key");
        return insertAt(obj, tree_.members(obj).size(), entry);
      }
      case ActionKind::InsertArrayElement: {
        const CstNode& arr = container(a.path, NodeKind::Array);
        auto members = tree_.members(arr);
        if (a.index > members.size())
          throw Error(ErrorCode::Path, "index " + std::to_string(a.index) + " is past the end of " + a.path.toString());
        return insertAt(arr, a.index, printValue(a.value, arr, memberIndent(arr)));
      }
      case ActionKind::DeleteNode: {
        auto [parent, i] = member(a.path);
        return {deleteMember(*parent, i)};
      }
      case ActionKind::DuplicateNode: {
        auto [parent, i] = member(a.path);
        const CstNode& m = tree_.node(tree_.members(*parent)[i]);
        if (parent->kind == NodeKind::Object) warn("duplicating '" + tree_.propertyName(m).decoded + "' creates a duplicate key");
        return insertAt(*parent, i + 1, std::string(tree_.textOf(m)));
      }
      case ActionKind::MoveSibling: {
        if (a.direction != 1 && a.direction != -1) throw Error(ErrorCode::InvalidParams, "direction must be -1 or +1");
        auto [parent, i] = member(a.path);
        auto members = tree_.members(*parent);
        long j = static_cast<long>(i) + a.direction;
        if (j < 0 || j >= static_cast<long>(members.size()))
          throw Error(ErrorCode::Path, "no sibling to swap with at " + a.path.toString());
        const CstNode& x = tree_.node(members[i]);
        const CstNode& y = tree_.node(members[static_cast<std::size_t>(j)]);
        return {{x.range, std::string(tree_.textOf(y))}, {y.range, std::string(tree_.textOf(x))}};
      }
      case ActionKind::ReplaceValue: {
        const CstNode& n = resolve(a.path);
        if (n.kind == NodeKind::PropertyName) throw Error(ErrorCode::Kind, "ReplaceValue targets a value, not a property name");
        const CstNode* ctx = n.parent == kNoNode ? &n : enclosingContainer(n);
        std::string indent = lineIndent(tree_.valueRange(n).start);
        return {{tree_.valueRange(n), printValue(a.value, *ctx, indent)}};
      }
      case ActionKind::RenameKey: {
        const CstNode& prop = property(a.path);
        const CstNode& obj = tree_.node(prop.parent);
        if (hasKey(obj, a.name, &prop)) warn("renaming to '" + a.name + "' creates a duplicate key");
        return {{tree_.propertyName(prop).range, Json(a.name).dump()}};
      }
      case ActionKind::SortObjectKeys: {
        const CstNode& obj = container(a.path, NodeKind::Object);
        auto members = tree_.members(obj);
        auto sorted = members;
        std::stable_sort(sorted.begin(), sorted.end(), [&](NodeId x, NodeId y) {
          return tree_.propertyName(tree_.node(x)).decoded < tree_.propertyName(tree_.node(y)).decoded;
        });
        std::vector<TextEdit> out;
        for (std::size_t i = 0; i < members.size(); ++i)
          if (members[i] != sorted[i])
            out.push_back({tree_.node(members[i]).range, std::string(tree_.textOf(tree_.node(sorted[i])))});
        return out;
      }
      case ActionKind::FormatDocument: {
        std::string formatted = format();
        if (formatted == text_) return {};
        return {{{0, text_.size()}, formatted}};
      }
    }
    return {};
  }

 private:
  void warn(std::string w) {
    if (warnings_) warnings_->push_back(std::move(w));
  }

  const CstNode& resolve(const KeyPath& path) {
    const CstNode* n = resolveKeyPath(tree_, path);
    if (!n) throw Error(ErrorCode::Path, "path " + path.toString() + " does not resolve");
    return *n;
  }

  const CstNode& container(const KeyPath& path, NodeKind kind) {
    const CstNode& n = resolve(path);
    if (n.kind != kind)
      throw Error(ErrorCode::Kind, "expected " + std::string(kindName(kind)) + " at " + path.toString() + ", found " +
                                       std::string(kindName(n.kind)));
    if (!closed(n)) throw Error(ErrorCode::Kind, "container at " + path.toString() + " is not closed");
    return n;
  }

  bool closed(const CstNode& c) const {
    ByteRange r = tree_.valueRange(c);
    char close = c.kind == NodeKind::Object ? '}' : ']';
    return r.size() >= 2 && text_[r.end - 1] == close;
  }

  const CstNode& property(const KeyPath& path) {
    if (path.steps().empty() || std::holds_alternative<Index>(path.steps().back()))
      throw Error(ErrorCode::Kind, "path " + path.toString() + " does not name a property");
    const CstNode& n = resolve(path);
    const CstNode& prop = tree_.node(n.parent);
    if (prop.kind != NodeKind::Property) throw Error(ErrorCode::Kind, "path " + path.toString() + " does not name a property");
    return prop;
  }

  // The container and member index addressed by a non-root path.
  std::pair<const CstNode*, std::size_t> member(const KeyPath& path) {
    if (path.steps().empty()) throw Error(ErrorCode::Kind, "the document root has no siblings");
    const CstNode& n = resolve(path);
    const CstNode* m = &n;
    if (!std::holds_alternative<Index>(path.steps().back())) m = &tree_.node(n.parent);
    const CstNode* parent = &tree_.node(m->parent);
    auto members = tree_.members(*parent);
    auto it = std::find(members.begin(), members.end(), m->id);
    if (it == members.end()) throw Error(ErrorCode::Path, "path " + path.toString() + " is not a container member");
    if (!closed(*parent)) throw Error(ErrorCode::Kind, "container of " + path.toString() + " is not closed");
    return {parent, static_cast<std::size_t>(it - members.begin())};
  }

  const CstNode* enclosingContainer(const CstNode& n) const {
    NodeId id = n.parent;
    while (id != kNoNode && tree_.node(id).kind != NodeKind::Object && tree_.node(id).kind != NodeKind::Array)
      id = tree_.node(id).parent;
    return id == kNoNode ? &n : &tree_.node(id);
  }

  bool hasKey(const CstNode& obj, const std::string& key, const CstNode* except) const {
    for (NodeId m : tree_.members(obj))
      if (&tree_.node(m) != except && tree_.propertyName(tree_.node(m)).decoded == key) return true;
    return false;
  }

  bool multiline(const CstNode& c) const {
    return tree_.valueText(c).find('\n') != std::string_view::npos;
  }

  std::string printValue(const Json& v, const CstNode& ctx, const std::string& indent) const {
    return multiline(ctx) ? printPretty(v, indent) : printInline(v);
  }

  // Whitespace from the start of the line holding `offset` to its first
  // non-blank character.
  std::string lineIndent(std::size_t offset) const {
    std::size_t ls = text_.rfind('\n', offset == 0 ? 0 : offset - 1);
    ls = (ls == std::string::npos || offset == 0) ? 0 : ls + 1;
    std::size_t e = ls;
    while (e < text_.size() && (text_[e] == ' ' || text_[e] == '\t')) ++e;
    return text_.substr(ls, e - ls);
  }

  std::string leadingWhitespace(const CstNode& m) const {
    std::size_t s = m.range.start;
    while (s > 0 && isWs(text_[s - 1])) --s;
    return text_.substr(s, m.range.start - s);
  }

  // Separator placed before a new member, copied from an existing member.
  std::string separatorLike(const CstNode& m) const {
    std::string ws = leadingWhitespace(m);
    auto nl = ws.rfind('\n');
    if (nl == std::string::npos) return " ";
    return "\n" + ws.substr(nl + 1);
  }

  std::string memberIndent(const CstNode& c) const {
    auto members = tree_.members(c);
    if (!members.empty()) {
      std::string sep = separatorLike(tree_.node(members.back()));
      if (sep.front() == '\n') return sep.substr(1);
      return lineIndent(tree_.node(members.back()).range.start);
    }
    return lineIndent(tree_.valueRange(c).start) + "  ";
  }

  // Skips whitespace and comments; returns the next significant offset.
  std::size_t skipTrivia(std::size_t p, std::size_t end) const {
    while (p < end) {
      if (isWs(text_[p])) {
        ++p;
      } else if (text_.compare(p, 2, "//") == 0) {
        while (p < end && text_[p] != '\n') ++p;
      } else if (text_.compare(p, 2, "/*") == 0) {
        auto e = text_.find("*/", p + 2);
        p = e == std::string::npos ? end : e + 2;
      } else {
        break;
      }
    }
    return p;
  }

  // Past any comments that follow on the same line. Sets `sawLineComment`.
  std::size_t skipSameLineComments(std::size_t p, std::size_t end, bool& sawLineComment) const {
    sawLineComment = false;
    std::size_t q = p;
    while (q < end) {
      if (text_[q] == ' ' || text_[q] == '\t') {
        ++q;
      } else if (text_.compare(q, 2, "//") == 0) {
        while (q < end && text_[q] != '\n') ++q;
        sawLineComment = true;
        return q;
      } else if (text_.compare(q, 2, "/*") == 0) {
        auto e = text_.find("*/", q + 2);
        if (e == std::string::npos || text_.substr(q, e - q).find('\n') != std::string::npos) break;
        q = e + 2;
        p = q;
      } else {
        break;
      }
    }
    return p;
  }

  std::vector<TextEdit> insertAt(const CstNode& c, std::size_t index, const std::string& entry) {
    auto members = tree_.members(c);
    ByteRange vr = tree_.valueRange(c);
    if (members.empty()) {
      std::size_t open = vr.start + 1;
      std::size_t close = vr.end - 1;
      std::size_t p = close;
      while (p > open && isWs(text_[p - 1])) --p;
      if (multiline(c)) return {{{p, p}, "\n" + memberIndent(c) + entry}};
      return {{{p, p}, (p > open ? " " : "") + entry}};
    }
    if (index < members.size()) {
      const CstNode& m = tree_.node(members[index]);
      return {{{m.range.start, m.range.start}, entry + "," + separatorLike(m)}};
    }
    const CstNode& last = tree_.node(members.back());
    std::string sep = separatorLike(last);
    std::size_t q = skipTrivia(last.range.end, vr.end);
    bool lineComment = false;
    if (q < vr.end && text_[q] == ',') {
      std::size_t at = skipSameLineComments(q + 1, vr.end, lineComment);
      if (lineComment && sep.front() != '\n') sep = "\n" + lineIndent(last.range.start);
      return {{{at, at}, sep + entry + ","}};
    }
    std::size_t at = skipSameLineComments(last.range.end, vr.end, lineComment);
    if (lineComment && sep.front() != '\n') sep = "\n" + lineIndent(last.range.start);
    if (at == last.range.end) return {{{at, at}, "," + sep + entry}};
    return {{{last.range.end, last.range.end}, ","}, {{at, at}, sep + entry}};
  }

  TextEdit deleteMember(const CstNode& c, std::size_t i) {
    auto members = tree_.members(c);
    const CstNode& m = tree_.node(members[i]);
    ByteRange vr = tree_.valueRange(c);
    if (members.size() == 1) {
      // Sole member: drop it with any trailing comma and the whitespace before it.
      std::size_t s = m.range.start;
      while (s > vr.start + 1 && isWs(text_[s - 1])) --s;
      if (s > vr.start + 1) {
        // A comment precedes: keep the line break that ends it.
        auto nl = text_.rfind('\n', m.range.start);
        if (nl != std::string::npos && nl >= s) s = nl + 1;
      }
      std::size_t e = m.range.end;
      std::size_t q = skipTrivia(e, vr.end);
      if (q < vr.end && text_[q] == ',') e = q + 1;
      return {{s, e}, ""};
    }
    if (i + 1 < members.size()) {
      // Up to the next member's leading whitespace end: the member, its comma,
      // and the blanks after the comma.
      std::size_t e = skipTrivia(m.range.end, vr.end);
      if (e < vr.end && text_[e] == ',') ++e;
      while (e < vr.end && isWs(text_[e])) ++e;
      return {{m.range.start, e}, ""};
    }
    // Last of several: remove the separating comma before it.
    const CstNode& prev = tree_.node(members[i - 1]);
    std::size_t s = skipTrivia(prev.range.end, vr.end);
    if (!(s < m.range.start && text_[s] == ',')) s = prev.range.end;
    return {{s, m.range.end}, ""};
  }

  // -- FormatDocument --------------------------------------------------------

  std::string format() {
    if (!tree_.wellFormed()) throw Error(ErrorCode::Kind, "cannot format a document with syntax errors");
    const CstNode& root = tree_.root();
    ByteRange vr = tree_.valueRange(root);
    std::string out;
    std::vector<NodeId> before, after;
    for (NodeId c : root.children) {
      const CstNode& n = tree_.node(c);
      if (!isComment(n.kind)) continue;
      if (n.range.end <= vr.start) before.push_back(c);
      else if (n.range.start >= vr.end) after.push_back(c);
    }
    for (NodeId c : before) out += std::string(tree_.textOf(tree_.node(c))) + "\n";
    out += formatValue(root, "", true);
    for (NodeId c : after) out += "\n" + std::string(tree_.textOf(tree_.node(c)));
    out += "\n";
    return out;
  }

  std::string formatValue(const CstNode& n, const std::string& indent, bool isRoot = false) {
    if (n.kind != NodeKind::Object && n.kind != NodeKind::Array) return std::string(tree_.valueText(n));
    ByteRange vr = tree_.valueRange(n);
    bool obj = n.kind == NodeKind::Object;
    std::vector<NodeId> inside;
    for (NodeId c : n.children) {
      const CstNode& ch = tree_.node(c);
      if (isRoot && (ch.range.end <= vr.start || ch.range.start >= vr.end)) continue;
      inside.push_back(c);
    }
    if (inside.empty()) return obj ? "{}" : "[]";
    std::string inner = indent + "  ";
    std::size_t remaining = tree_.members(n).size();
    std::string out = obj ? "{\n" : "[\n";
    for (NodeId c : inside) {
      const CstNode& ch = tree_.node(c);
      if (isComment(ch.kind)) {
        out += inner + std::string(tree_.textOf(ch)) + "\n";
        continue;
      }
      --remaining;
      std::string comma = remaining ? "," : "";
      if (ch.kind == NodeKind::Property) {
        for (NodeId pc : ch.children)
          if (isComment(tree_.node(pc).kind)) out += inner + std::string(tree_.textOf(tree_.node(pc))) + "\n";
        out += inner + std::string(tree_.textOf(tree_.propertyName(ch))) + ": " +
               formatValue(tree_.propertyValue(ch), inner) + comma + "\n";
      } else {
        out += inner + formatValue(ch, inner) + comma + "\n";
      }
    }
    return out + indent + (obj ? "}" : "]");
  }

  const SyntaxTree& tree_;
  const std::string& text_;
  std::vector<std::string>* warnings_;
};

}  // namespace detail

/// Compiles an action to text edits against `tree`. Non-fatal notes (such as
/// a rename that creates a duplicate key) are appended to `warnings`.
inline std::vector<TextEdit> compile(const SyntaxTree& tree, const EditAction& action,
                                     std::vector<std::string>* warnings = nullptr) {
  return detail::EditCompiler(tree, warnings).compile(action);
}

/// compile + apply.
inline std::string applyAction(const SyntaxTree& tree, const EditAction& action,
                               std::vector<std::string>* warnings = nullptr) {
  return apply(tree.text(), compile(tree, action, warnings));
}

}  // namespace projedit
