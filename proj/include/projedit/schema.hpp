#pragma once

// JSON Schema support for a draft-07 subset: loading with internal $ref
// resolution, applicable-subschema inference per keypath, minimal instance
// synthesis, and validation of a concrete syntax tree.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "projedit/error.hpp"
#include "projedit/jsonc.hpp"

namespace projedit {

struct SchemaNodeDef {
  // Definition name when the node sits directly under `definitions`/`$defs`.
  std::optional<std::string> name;
  // JSON pointer of the node inside its document ("#", "#/properties/a", ...).
  std::string pointer;
  // Set for boolean schemas (`true` / `false`).
  std::optional<bool> boolean;

  std::vector<std::string> types;
  std::optional<Json> enumValues;  // array
  std::optional<Json> constValue;
  // Property schemas in document order; merged nodes may repeat a name.
  std::vector<std::pair<std::string, const SchemaNodeDef*>> properties;
  std::vector<std::string> required;
  std::vector<const SchemaNodeDef*> additionalProperties;
  std::vector<const SchemaNodeDef*> items;
  std::vector<const SchemaNodeDef*> anyOf;
  std::vector<const SchemaNodeDef*> oneOf;
  std::vector<const SchemaNodeDef*> allOf;
  const SchemaNodeDef* ref = nullptr;
  std::string refText;
  std::optional<std::string> title;
  std::optional<std::string> description;
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<std::size_t> minItems;
  std::optional<std::size_t> maxItems;

  std::vector<std::string> unsupportedKeywords;
  // Populated on nodes produced by merging an allOf.
  std::vector<std::string> mergeConflicts;
  // For merged nodes: the schema node the merge was computed for.
  const SchemaNodeDef* origin = nullptr;

  const SchemaNodeDef* identity() const { return origin ? origin : this; }
  std::string displayName() const { return name ? *name : pointer; }

  bool hasBranches() const { return !anyOf.empty() || !oneOf.empty(); }
  bool hasConstraints() const {
    return !types.empty() || enumValues || constValue || !properties.empty() || !required.empty() ||
           !additionalProperties.empty() || !items.empty() || minimum || maximum || minItems || maxItems || boolean;
  }

  std::vector<const SchemaNodeDef*> propertySchemas(std::string_view key) const {
    std::vector<const SchemaNodeDef*> out;
    for (const auto& [n, def] : properties)
      if (n == key) out.push_back(def);
    return out;
  }
  bool declares(std::string_view key) const {
    return std::any_of(properties.begin(), properties.end(), [&](const auto& p) { return p.first == key; });
  }
};

class SchemaDoc {
 public:
  const SchemaNodeDef& root() const { return *root_; }
  const std::map<std::string, const SchemaNodeDef*>& definitions() const { return definitions_; }
  const std::string& sourceUri() const { return sourceUri_; }
  const std::vector<std::string>& cyclicDefinitions() const { return cyclic_; }
  const std::vector<std::unique_ptr<SchemaNodeDef>>& nodes() const { return nodes_; }

  const SchemaNodeDef* definition(std::string_view name) const {
    auto it = definitions_.find(std::string(name));
    return it == definitions_.end() ? nullptr : it->second;
  }

 private:
  friend std::shared_ptr<const SchemaDoc> loadSchema(std::string_view json, std::string sourceUri);
  friend class SchemaLoader;

  std::vector<std::unique_ptr<SchemaNodeDef>> nodes_;
  const SchemaNodeDef* root_ = nullptr;
  std::map<std::string, const SchemaNodeDef*> definitions_;
  std::string sourceUri_;
  std::vector<std::string> cyclic_;
};

using SchemaPtr = std::shared_ptr<const SchemaDoc>;

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline std::string escapePointerToken(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

inline std::string percentDecode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace detail

class SchemaLoader {
 public:
  explicit SchemaLoader(SchemaDoc& doc) : doc_(doc) {}

  void load(const Json& json) {
    doc_.root_ = build(json, "#", std::nullopt);
    for (auto& [node, target] : pendingRefs_) resolveRef(*node, target);
    findCycles();
  }

 private:
  static bool isSchemaValue(const Json& j) { return j.is_object() || j.is_boolean(); }

  SchemaNodeDef* build(const Json& json, const std::string& pointer, std::optional<std::string> name) {
    auto owned = std::make_unique<SchemaNodeDef>();
    SchemaNodeDef* node = owned.get();
    doc_.nodes_.push_back(std::move(owned));
    node->pointer = pointer;
    node->name = std::move(name);
    byPointer_[pointer] = node;
    if (json.is_boolean()) {
      node->boolean = json.get<bool>();
      return node;
    }
    if (!json.is_object()) throw Error(ErrorCode::SchemaRef, "schema at " + pointer + " is not an object");

    auto child = [&](const Json& j, const std::string& suffix) -> SchemaNodeDef* {
      if (!isSchemaValue(j)) throw Error(ErrorCode::SchemaRef, "schema at " + pointer + suffix + " is not a schema");
      return build(j, pointer + suffix, std::nullopt);
    };

    for (const auto& [key, value] : json.items()) {
      if (key == "type") {
        if (value.is_string()) node->types.push_back(value.get<std::string>());
        else if (value.is_array())
          for (const auto& t : value)
            if (t.is_string()) node->types.push_back(t.get<std::string>());
      } else if (key == "enum" && value.is_array()) {
        node->enumValues = value;
      } else if (key == "const") {
        node->constValue = value;
      } else if (key == "properties" && value.is_object()) {
        for (const auto& [prop, sub] : value.items())
          node->properties.emplace_back(prop, child(sub, "/properties/" + detail::escapePointerToken(prop)));
      } else if (key == "required" && value.is_array()) {
        for (const auto& r : value)
          if (r.is_string()) node->required.push_back(r.get<std::string>());
      } else if (key == "additionalProperties" && isSchemaValue(value)) {
        node->additionalProperties.push_back(child(value, "/additionalProperties"));
      } else if (key == "items" && isSchemaValue(value)) {
        node->items.push_back(child(value, "/items"));
      } else if ((key == "anyOf" || key == "oneOf" || key == "allOf") && value.is_array()) {
        auto& list = key == "anyOf" ? node->anyOf : key == "oneOf" ? node->oneOf : node->allOf;
        for (std::size_t i = 0; i < value.size(); ++i)
          list.push_back(child(value[i], "/" + key + "/" + std::to_string(i)));
      } else if (key == "$ref" && value.is_string()) {
        node->refText = value.get<std::string>();
        if (node->refText.empty() || node->refText[0] != '#')
          throw Error(ErrorCode::UnsupportedRef, "external reference '" + node->refText + "' at " + pointer);
        pendingRefs_.emplace_back(node, node->refText);
      } else if (key == "title" && value.is_string()) {
        node->title = value.get<std::string>();
      } else if (key == "description" && value.is_string()) {
        node->description = value.get<std::string>();
      } else if (key == "minimum" && value.is_number()) {
        node->minimum = value.get<double>();
      } else if (key == "maximum" && value.is_number()) {
        node->maximum = value.get<double>();
      } else if (key == "minItems" && value.is_number_unsigned()) {
        node->minItems = value.get<std::size_t>();
      } else if (key == "maxItems" && value.is_number_unsigned()) {
        node->maxItems = value.get<std::size_t>();
      } else if ((key == "definitions" || key == "$defs") && value.is_object()) {
        for (const auto& [defName, sub] : value.items()) {
          if (!isSchemaValue(sub)) continue;
          SchemaNodeDef* def = build(sub, pointer + "/" + key + "/" + detail::escapePointerToken(defName), defName);
          if (pointer == "#") doc_.definitions_.emplace(defName, def);
        }
      } else {
        node->unsupportedKeywords.push_back(key);
      }
    }
    return node;
  }

  void resolveRef(SchemaNodeDef& node, const std::string& ref) {
    std::string pointer = detail::percentDecode(ref);
    auto it = byPointer_.find(pointer);
    if (it == byPointer_.end()) throw Error(ErrorCode::SchemaRef, "unresolvable reference '" + ref + "'");
    node.ref = it->second;
  }

  // Records definitions that can reach themselves through schema links.
  void findCycles() {
    for (const auto& [name, def] : doc_.definitions_) {
      std::unordered_set<const SchemaNodeDef*> seen;
      std::vector<const SchemaNodeDef*> stack = successors(def);
      bool cyclic = false;
      while (!stack.empty() && !cyclic) {
        const SchemaNodeDef* n = stack.back();
        stack.pop_back();
        if (n == def) cyclic = true;
        if (!seen.insert(n).second) continue;
        for (const auto* s : successors(n)) stack.push_back(s);
      }
      if (cyclic) doc_.cyclic_.push_back(name);
    }
  }

  static std::vector<const SchemaNodeDef*> successors(const SchemaNodeDef* n) {
    std::vector<const SchemaNodeDef*> out;
    for (const auto& p : n->properties) out.push_back(p.second);
    for (auto* list : {&n->additionalProperties, &n->items, &n->anyOf, &n->oneOf, &n->allOf})
      out.insert(out.end(), list->begin(), list->end());
    if (n->ref) out.push_back(n->ref);
    return out;
  }

  SchemaDoc& doc_;
  std::unordered_map<std::string, SchemaNodeDef*> byPointer_;
  std::vector<std::pair<SchemaNodeDef*, std::string>> pendingRefs_;
};

/// Loads a schema from strict JSON text. Throws SchemaRefError for unresolvable
/// or malformed schemas and UnsupportedRefError for external references.
inline SchemaPtr loadSchema(std::string_view json, std::string sourceUri = "inline") {
  Json parsed;
  try {
    parsed = Json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaRef, std::string("schema is not valid JSON: ") + e.what());
  }
  auto doc = std::shared_ptr<SchemaDoc>(new SchemaDoc());
  doc->sourceUri_ = std::move(sourceUri);
  SchemaLoader(*doc).load(parsed);
  return doc;
}

// ---------------------------------------------------------------------------
// Equality that ignores object key order.

inline bool jsonEqual(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
  if (a.type() != b.type()) return false;
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a.items()) {
      auto it = b.find(k);
      if (it == b.end() || !jsonEqual(v, *it)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!jsonEqual(a[i], b[i])) return false;
    return true;
  }
  return a == b;
}

// ---------------------------------------------------------------------------
// allOf merging

namespace detail {

inline const SchemaNodeDef* followRefs(const SchemaNodeDef* def) {
  std::unordered_set<const SchemaNodeDef*> seen;
  while (def->ref && seen.insert(def).second) def = def->ref;
  return def->ref ? nullptr : def;  // nullptr: a reference loop with no schema behind it
}

inline void mergeInto(SchemaNodeDef& into, const SchemaNodeDef& from) {
  auto conflict = [&](const std::string& what) { into.mergeConflicts.push_back(what + " (from " + from.pointer + ")"); };
  if (from.boolean && !*from.boolean) into.boolean = false;
  if (!from.types.empty()) {
    if (into.types.empty()) {
      into.types = from.types;
    } else {
      std::vector<std::string> both;
      for (const auto& t : into.types) {
        for (const auto& u : from.types) {
          if (t == u) both.push_back(t);
          else if ((t == "integer" && u == "number") || (t == "number" && u == "integer")) both.push_back("integer");
        }
      }
      if (both.empty()) conflict("type");
      else into.types = both;
    }
  }
  if (from.enumValues) {
    if (!into.enumValues) {
      into.enumValues = from.enumValues;
    } else {
      Json both = Json::array();
      for (const auto& v : *into.enumValues)
        for (const auto& w : *from.enumValues)
          if (jsonEqual(v, w)) both.push_back(v);
      if (both.empty()) conflict("enum");
      else into.enumValues = both;
    }
  }
  if (from.constValue) {
    if (into.constValue && !jsonEqual(*into.constValue, *from.constValue)) conflict("const");
    else into.constValue = from.constValue;
  }
  into.properties.insert(into.properties.end(), from.properties.begin(), from.properties.end());
  for (const auto& r : from.required)
    if (std::find(into.required.begin(), into.required.end(), r) == into.required.end()) into.required.push_back(r);
  into.additionalProperties.insert(into.additionalProperties.end(), from.additionalProperties.begin(),
                                   from.additionalProperties.end());
  into.items.insert(into.items.end(), from.items.begin(), from.items.end());
  into.anyOf.insert(into.anyOf.end(), from.anyOf.begin(), from.anyOf.end());
  into.oneOf.insert(into.oneOf.end(), from.oneOf.begin(), from.oneOf.end());
  if (!into.title) into.title = from.title;
  if (!into.description) into.description = from.description;
  auto tighten = [](std::optional<double>& a, const std::optional<double>& b, bool lower) {
    if (b) a = a ? (lower ? std::max(*a, *b) : std::min(*a, *b)) : b;
  };
  tighten(into.minimum, from.minimum, true);
  tighten(into.maximum, from.maximum, false);
  if (from.minItems) into.minItems = into.minItems ? std::max(*into.minItems, *from.minItems) : from.minItems;
  if (from.maxItems) into.maxItems = into.maxItems ? std::min(*into.maxItems, *from.maxItems) : from.maxItems;
  for (const auto& k : from.unsupportedKeywords)
    if (std::find(into.unsupportedKeywords.begin(), into.unsupportedKeywords.end(), k) == into.unsupportedKeywords.end())
      into.unsupportedKeywords.push_back(k);
}

inline void collectAllOf(const SchemaNodeDef* def, std::vector<const SchemaNodeDef*>& out,
                         std::unordered_set<const SchemaNodeDef*>& seen) {
  def = followRefs(def);
  if (!def || !seen.insert(def).second) return;
  out.push_back(def);
  for (const auto* member : def->allOf) collectAllOf(member, out, seen);
}

}  // namespace detail

/// Merges a node with its (transitive) allOf members into one node. Nodes
/// without allOf are returned as-is (aliasing `keepAlive`).
inline std::shared_ptr<const SchemaNodeDef> flattenAllOf(const SchemaNodeDef* def, const SchemaPtr& keepAlive) {
  if (def->allOf.empty()) return std::shared_ptr<const SchemaNodeDef>(keepAlive, def);
  std::vector<const SchemaNodeDef*> parts;
  std::unordered_set<const SchemaNodeDef*> seen;
  detail::collectAllOf(def, parts, seen);
  auto merged = std::make_shared<SchemaNodeDef>();
  merged->name = def->name;
  merged->pointer = def->pointer;
  merged->origin = def;
  for (const auto* part : parts) detail::mergeInto(*merged, *part);
  merged->allOf.clear();
  return merged;
}

// ---------------------------------------------------------------------------
// SchemaSet inference

struct BranchChoice {
  std::string combinator;  // "anyOf" | "oneOf"
  std::size_t index = 0;
  std::string owner;  // display name of the node holding the combinator
  friend bool operator==(const BranchChoice&, const BranchChoice&) = default;
};

struct SchemaSetEntry {
  std::shared_ptr<const SchemaNodeDef> def;
  std::string name;
  std::vector<BranchChoice> viaBranch;
};

struct SchemaSet {
  std::vector<SchemaSetEntry> entries;
  std::vector<std::string> warnings;  // allOf merge conflicts

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.name);
    return out;
  }
  bool hasName(std::string_view n) const {
    return std::any_of(entries.begin(), entries.end(), [&](const SchemaSetEntry& e) { return e.name == n; });
  }
  /// Union of `type` keywords across entries, in first-seen order.
  std::vector<std::string> typeUnion() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      for (const auto& t : e.def->types)
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    return out;
  }
};

namespace detail {

class SchemaExpander {
 public:
  explicit SchemaExpander(SchemaPtr doc) : doc_(std::move(doc)) {}

  void expand(const SchemaNodeDef* def, const std::vector<BranchChoice>& via,
              std::unordered_set<const SchemaNodeDef*> visiting) {
    while (def->ref) {
      if (!visiting.insert(def).second) return;
      def = def->ref;
    }
    if (!visiting.insert(def).second) return;
    auto node = flattenAllOf(def, doc_);
    for (const auto& c : node->mergeConflicts) addWarning("allOf conflict at " + def->pointer + ": " + c);
    if (node->boolean && !*node->boolean) return;
    if (!node->hasBranches() || node->hasConstraints()) add(node, via);
    auto branches = [&](const std::vector<const SchemaNodeDef*>& list, const char* kind) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        auto next = via;
        next.push_back({kind, i, node->displayName()});
        expand(list[i], next, visiting);
      }
    };
    branches(node->anyOf, "anyOf");
    branches(node->oneOf, "oneOf");
  }

  SchemaSet take() { return std::move(set_); }

 private:
  void add(std::shared_ptr<const SchemaNodeDef> node, const std::vector<BranchChoice>& via) {
    const SchemaNodeDef* id = node->identity();
    if (!seen_.insert(id).second) return;
    std::string name = node->displayName();
    set_.entries.push_back({std::move(node), std::move(name), via});
  }
  void addWarning(std::string w) {
    if (std::find(set_.warnings.begin(), set_.warnings.end(), w) == set_.warnings.end()) set_.warnings.push_back(std::move(w));
  }

  SchemaPtr doc_;
  SchemaSet set_;
  std::unordered_set<const SchemaNodeDef*> seen_;
};

}  // namespace detail

/// Every subschema applicable at `def` once $ref, allOf, anyOf and oneOf are expanded.
inline SchemaSet expandSchema(const SchemaPtr& schema, const SchemaNodeDef& def) {
  detail::SchemaExpander ex(schema);
  ex.expand(&def, {}, {});
  return ex.take();
}

/// Subschemas reached from the entries of `set` by one path step.
inline SchemaSet stepSchemaSet(const SchemaPtr& schema, const SchemaSet& set, const PathStep& step) {
  detail::SchemaExpander ex(schema);
  for (const auto& entry : set.entries) {
    std::vector<const SchemaNodeDef*> next;
    if (const auto* idx = std::get_if<Index>(&step)) {
      (void)idx;
      next = entry.def->items;
    } else {
      const std::string& key = std::holds_alternative<Key>(step) ? std::get<Key>(step).name : std::get<KeyName>(step).name;
      next = entry.def->propertySchemas(key);
      if (next.empty()) next = entry.def->additionalProperties;
    }
    for (const auto* n : next) ex.expand(n, entry.viaBranch, {});
  }
  SchemaSet out = ex.take();
  for (const auto& w : set.warnings)
    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
  return out;
}

/// Applicable subschemas at `path`. anyOf/oneOf branches are kept whether or
/// not the current value satisfies them.
inline SchemaSet inferSchemaSet(const SyntaxTree& /*tree*/, const SchemaPtr& schema, const KeyPath& path) {
  SchemaSet set = expandSchema(schema, schema->root());
  for (const auto& step : path.steps()) {
    if (set.empty()) break;
    set = stepSchemaSet(schema, set, step);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Minimal instance synthesis

struct SynthesisResult {
  Json value;
  bool truncated = false;  // depth limit hit or an unsatisfiable reference loop
};

namespace detail {

class Synthesizer {
 public:
  Synthesizer(std::size_t depthLimit) : limit_(depthLimit) {}

  Json run(const SchemaNodeDef* def, std::size_t depth, std::unordered_set<const SchemaNodeDef*> chain) {
    const SchemaNodeDef* concrete = followRefs(def);
    if (!concrete || !chain.insert(concrete).second) {
      truncated = true;
      return nullptr;
    }
    std::shared_ptr<const SchemaNodeDef> node = flattenAllOf(concrete, nullptr);
    if (node->constValue) return *node->constValue;
    if (node->enumValues && !node->enumValues->empty()) return node->enumValues->front();
    if (node->hasBranches()) {
      // First branch in document order that does not loop back into the chain.
      const auto& list = !node->anyOf.empty() ? node->anyOf : node->oneOf;
      const SchemaNodeDef* branch = nullptr;
      for (const auto* b : list) {
        const SchemaNodeDef* c = followRefs(b);
        if (c && !chain.count(c)) {
          branch = c;
          break;
        }
      }
      if (!branch) {
        truncated = true;
        return nullptr;
      }
      chain.insert(branch);
      auto combined = std::make_shared<SchemaNodeDef>(*node);
      combined->anyOf.clear();
      combined->oneOf.clear();
      combined->origin = node->identity();
      auto flatBranch = flattenAllOf(branch, nullptr);
      mergeInto(*combined, *flatBranch);
      // The combined node is transient; keep it alive for the duration of
      // the recursive call through `keep_`.
      keep_.push_back(combined);
      chain.insert(node->identity());
      return run(combined.get(), depth, chain);
    }
    std::string type = !node->types.empty() ? node->types.front() : inferType(*node);
    if (type == "object") {
      if (!node->required.empty() && depth >= limit_) {
        truncated = true;
        return nullptr;
      }
      Json out = Json::object();
      for (const auto& key : node->required) {
        auto schemas = node->propertySchemas(key);
        if (schemas.empty()) schemas = node->additionalProperties;
        out[key] = schemas.empty() ? Json(nullptr) : childValue(schemas, depth);
      }
      return out;
    }
    if (type == "array") {
      std::size_t n = node->minItems.value_or(0);
      if (n > 0 && depth >= limit_) {
        truncated = true;
        return nullptr;
      }
      Json out = Json::array();
      for (std::size_t i = 0; i < n; ++i) out.push_back(node->items.empty() ? Json(nullptr) : childValue(node->items, depth));
      return out;
    }
    if (type == "string") return "";
    if (type == "boolean") return false;
    if (type == "integer") {
      if (node->minimum) return static_cast<std::int64_t>(std::ceil(*node->minimum));
      if (node->maximum && *node->maximum < 0) return static_cast<std::int64_t>(std::floor(*node->maximum));
      return 0;
    }
    if (type == "number") {
      if (node->minimum) return numberValue(*node->minimum);
      if (node->maximum && *node->maximum < 0) return numberValue(*node->maximum);
      return 0;
    }
    return nullptr;
  }

  bool truncated = false;

 private:
  static Json numberValue(double v) {
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    return v;
  }

  static std::string inferType(const SchemaNodeDef& n) {
    if (!n.properties.empty() || !n.required.empty() || !n.additionalProperties.empty()) return "object";
    if (!n.items.empty() || n.minItems) return "array";
    if (n.minimum || n.maximum) return "number";
    return "null";
  }

  Json childValue(const std::vector<const SchemaNodeDef*>& schemas, std::size_t depth) {
    if (schemas.size() == 1) return run(schemas.front(), depth + 1, {});
    // Several schemas constrain the same slot: synthesize from their conjunction.
    auto conj = std::make_shared<SchemaNodeDef>();
    conj->pointer = schemas.front()->pointer;
    for (const auto* s : schemas) {
      const SchemaNodeDef* c = followRefs(s);
      if (!c) continue;
      mergeInto(*conj, *flattenAllOf(c, nullptr));
    }
    keep_.push_back(conj);
    return run(conj.get(), depth + 1, {});
  }

  std::size_t limit_;
  std::vector<std::shared_ptr<SchemaNodeDef>> keep_;
};

}  // namespace detail

/// Smallest value satisfying `def`'s required structure. Ties pick the first
/// enum member and the first anyOf/oneOf branch.
inline SynthesisResult synthesizeMinimal(const SchemaNodeDef& def, std::size_t depthLimit = 16) {
  detail::Synthesizer s(depthLimit);
  Json value = s.run(&def, 0, {});
  return {std::move(value), s.truncated};
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationDiagnostic {
  KeyPath keyPath;
  std::string message;
  std::string rule;
  Severity severity = Severity::Error;
};

namespace detail {

class Validator {
 public:
  explicit Validator(const SyntaxTree& tree) : tree_(tree) {}

  void node(const CstNode& n, const KeyPath& path, const SchemaNodeDef* def,
            std::unordered_set<const SchemaNodeDef*> chain, std::vector<ValidationDiagnostic>& out) {
    if (!chain.insert(def).second) return;
    if (def->ref) {
      node(n, path, def->ref, chain, out);
      return;
    }
    if (n.kind == NodeKind::Error || n.kind == NodeKind::Missing) return;
    if (def->boolean) {
      if (!*def->boolean) out.push_back({path, "no value is allowed here", "false", Severity::Error});
      return;
    }
    Json value = toJson(tree_, n);

    if (!def->types.empty() && !std::any_of(def->types.begin(), def->types.end(), [&](const std::string& t) { return typeMatches(t, n, value); })) {
      out.push_back({path, "expected " + joinTypes(def->types) + ", found " + std::string(kindName(n.kind)), "type", Severity::Error});
    }
    if (def->enumValues) {
      bool ok = std::any_of(def->enumValues->begin(), def->enumValues->end(), [&](const Json& v) { return jsonEqual(v, value); });
      if (!ok) out.push_back({path, "value " + value.dump() + " is not one of " + def->enumValues->dump(), "enum", Severity::Error});
    }
    if (def->constValue && !jsonEqual(*def->constValue, value)) {
      out.push_back({path, "value must be " + def->constValue->dump(), "const", Severity::Error});
    }
    if (n.kind == NodeKind::Number) {
      double v = value.get<double>();
      if (def->minimum && v < *def->minimum)
        out.push_back({path, "value is below minimum " + Json(*def->minimum).dump(), "minimum", Severity::Error});
      if (def->maximum && v > *def->maximum)
        out.push_back({path, "value is above maximum " + Json(*def->maximum).dump(), "maximum", Severity::Error});
    }
    if (n.kind == NodeKind::Object) object(n, path, *def, out);
    if (n.kind == NodeKind::Array) array(n, path, *def, out);

    for (const auto* member : def->allOf) node(n, path, member, chain, out);
    if (!def->anyOf.empty()) {
      auto best = bestBranch(n, path, def->anyOf, chain);
      if (best.second > 0) out.insert(out.end(), best.first.begin(), best.first.end());
    }
    if (!def->oneOf.empty()) {
      std::size_t passing = 0;
      for (const auto* b : def->oneOf) {
        std::vector<ValidationDiagnostic> tmp;
        node(n, path, b, chain, tmp);
        if (tmp.empty()) ++passing;
      }
      if (passing == 0) {
        auto best = bestBranch(n, path, def->oneOf, chain);
        out.insert(out.end(), best.first.begin(), best.first.end());
      } else if (passing > 1) {
        out.push_back({path, "value matches " + std::to_string(passing) + " oneOf branches", "oneOf", Severity::Error});
      }
    }
  }

 private:
  std::pair<std::vector<ValidationDiagnostic>, std::size_t> bestBranch(
      const CstNode& n, const KeyPath& path, const std::vector<const SchemaNodeDef*>& branches,
      const std::unordered_set<const SchemaNodeDef*>& chain) {
    std::vector<ValidationDiagnostic> best;
    std::size_t bestCount = static_cast<std::size_t>(-1);
    for (const auto* b : branches) {
      std::vector<ValidationDiagnostic> tmp;
      node(n, path, b, chain, tmp);
      if (tmp.size() < bestCount) {
        bestCount = tmp.size();
        best = std::move(tmp);
      }
      if (bestCount == 0) break;
    }
    return {best, bestCount};
  }

  void object(const CstNode& n, const KeyPath& path, const SchemaNodeDef& def, std::vector<ValidationDiagnostic>& out) {
    std::set<std::string> present;
    for (NodeId m : tree_.members(n)) {
      const CstNode& prop = tree_.node(m);
      const std::string& key = tree_.propertyName(prop).decoded;
      if (!present.insert(key).second) continue;  // duplicates validate as their first occurrence
      KeyPath child = path.child(Key{key});
      const CstNode& value = tree_.propertyValue(prop);
      auto schemas = def.propertySchemas(key);
      if (schemas.empty()) schemas = def.additionalProperties;
      for (const auto* s : schemas) {
        if (s->boolean && !*s->boolean && !def.declares(key)) {
          out.push_back({child, "property '" + key + "' is not allowed", "additionalProperties", Severity::Error});
          continue;
        }
        node(value, child, s, {}, out);
      }
    }
    for (const auto& r : def.required) {
      if (!present.count(r)) out.push_back({path, "missing required property '" + r + "'", "required", Severity::Error});
    }
  }

  void array(const CstNode& n, const KeyPath& path, const SchemaNodeDef& def, std::vector<ValidationDiagnostic>& out) {
    auto members = tree_.members(n);
    if (def.minItems && members.size() < *def.minItems)
      out.push_back({path, "expected at least " + std::to_string(*def.minItems) + " items", "minItems", Severity::Error});
    if (def.maxItems && members.size() > *def.maxItems)
      out.push_back({path, "expected at most " + std::to_string(*def.maxItems) + " items", "maxItems", Severity::Error});
    for (std::size_t i = 0; i < members.size(); ++i)
      for (const auto* s : def.items) node(tree_.node(members[i]), path.child(Index{i}), s, {}, out);
  }

  static bool typeMatches(const std::string& t, const CstNode& n, const Json& value) {
    switch (n.kind) {
      case NodeKind::Object: return t == "object";
      case NodeKind::Array: return t == "array";
      case NodeKind::String: return t == "string";
      case NodeKind::True:
      case NodeKind::False: return t == "boolean";
      case NodeKind::Null: return t == "null";
      case NodeKind::Number:
        if (t == "number") return true;
        if (t == "integer") {
          double d = value.get<double>();
          return std::isfinite(d) && std::floor(d) == d;
        }
        return false;
      default: return false;
    }
  }

  static std::string joinTypes(const std::vector<std::string>& types) {
    std::string out;
    for (std::size_t i = 0; i < types.size(); ++i) out += (i ? " | " : "") + types[i];
    return out;
  }

  const SyntaxTree& tree_;
};

}  // namespace detail

/// Validates the document value against `rootDef` (defaults to the schema root).
inline std::vector<ValidationDiagnostic> validate(const SyntaxTree& tree, const SchemaDoc& schema,
                                                  const SchemaNodeDef* rootDef = nullptr) {
  const SchemaNodeDef* def = rootDef ? rootDef : &schema.root();
  std::vector<ValidationDiagnostic> out;
  const CstNode& root = tree.root();
  if (root.kind == NodeKind::Missing) {
    // An empty document is an absent value: only `required` can complain.
    SchemaPtr alias(std::shared_ptr<const SchemaDoc>(), &schema);
    bool needsValue = false;
    for (const auto& e : expandSchema(alias, *def).entries) needsValue = needsValue || !e.def->required.empty();
    if (needsValue) out.push_back({KeyPath{}, "document is empty but properties are required", "required", Severity::Error});
    return out;
  }
  detail::Validator(tree).node(root, KeyPath{}, def, {}, out);
  return out;
}

}  // namespace projedit
