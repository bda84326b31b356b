#pragma once

// Lossless, error-tolerant JSONC concrete syntax tree.
//
// Every byte of the input belongs either to a node or to the trivia between
// sibling nodes (whitespace, commas, colons, brackets), so the original text
// can always be reconstructed. Malformed input never fails to parse: recovery
// produces Error and Missing nodes, each backed by a ParseDiagnostic.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "projedit/error.hpp"

namespace projedit {

using Json = nlohmann::ordered_json;

struct ByteRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t offset) const { return start <= offset && offset <= end; }
  bool covers(const ByteRange& other) const { return start <= other.start && other.end <= end; }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

enum class NodeKind {
  Object,
  Array,
  Property,
  PropertyName,
  String,
  Number,
  True,
  False,
  Null,
  LineComment,
  BlockComment,
  Error,
  Missing,
};

inline std::string_view kindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::Object: return "Object";
    case NodeKind::Array: return "Array";
    case NodeKind::Property: return "Property";
    case NodeKind::PropertyName: return "PropertyName";
    case NodeKind::String: return "String";
    case NodeKind::Number: return "Number";
    case NodeKind::True: return "True";
    case NodeKind::False: return "False";
    case NodeKind::Null: return "Null";
    case NodeKind::LineComment: return "LineComment";
    case NodeKind::BlockComment: return "BlockComment";
    case NodeKind::Error: return "Error";
    case NodeKind::Missing: return "Missing";
  }
  return "?";
}

inline std::optional<NodeKind> kindFromName(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(NodeKind::Missing); ++k) {
    if (kindName(static_cast<NodeKind>(k)) == name) return static_cast<NodeKind>(k);
  }
  return std::nullopt;
}

inline bool isComment(NodeKind kind) {
  return kind == NodeKind::LineComment || kind == NodeKind::BlockComment;
}

inline bool isScalar(NodeKind kind) {
  return kind == NodeKind::String || kind == NodeKind::Number || kind == NodeKind::True ||
         kind == NodeKind::False || kind == NodeKind::Null;
}

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct CstNode {
  NodeKind kind = NodeKind::Missing;
  ByteRange range;
  std::vector<NodeId> children;
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  // Error/Missing nodes that stand in for punctuation (a missing comma or
  // bracket, a stray colon) rather than for a value slot.
  bool punctuation = false;
  // Unescaped contents of String and PropertyName tokens.
  std::string decoded;
};

enum class RecoveryCode {
  TrailingComma,
  MissingComma,
  MissingValue,
  UnterminatedString,
  UnexpectedToken,
  UnbalancedBracket,
};

inline std::string_view recoveryName(RecoveryCode code) {
  switch (code) {
    case RecoveryCode::TrailingComma: return "TrailingComma";
    case RecoveryCode::MissingComma: return "MissingComma";
    case RecoveryCode::MissingValue: return "MissingValue";
    case RecoveryCode::UnterminatedString: return "UnterminatedString";
    case RecoveryCode::UnexpectedToken: return "UnexpectedToken";
    case RecoveryCode::UnbalancedBracket: return "UnbalancedBracket";
  }
  return "?";
}

enum class Severity { Error, Warning };

inline std::string_view severityName(Severity s) { return s == Severity::Error ? "error" : "warning"; }

struct ParseDiagnostic {
  ByteRange range;
  RecoveryCode code;
  Severity severity;
  std::string message;
  NodeId node = kNoNode;  // the Error/Missing node this diagnostic explains, if any
};

// ---------------------------------------------------------------------------
// KeyPath

struct Key {
  std::string name;
  friend bool operator==(const Key&, const Key&) = default;
};
struct Index {
  std::size_t index = 0;
  friend bool operator==(const Index&, const Index&) = default;
};
/// Addresses the property-name token itself. Only valid as the last step.
struct KeyName {
  std::string name;
  friend bool operator==(const KeyName&, const KeyName&) = default;
};

using PathStep = std::variant<Key, Index, KeyName>;

class KeyPath {
 public:
  KeyPath() = default;
  KeyPath(std::initializer_list<PathStep> steps) : steps_(steps) {}
  explicit KeyPath(std::vector<PathStep> steps) : steps_(std::move(steps)) {}

  const std::vector<PathStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  const PathStep& operator[](std::size_t i) const { return steps_[i]; }
  const PathStep& back() const { return steps_.back(); }

  KeyPath child(PathStep step) const {
    KeyPath out = *this;
    out.steps_.push_back(std::move(step));
    return out;
  }
  KeyPath parent() const {
    KeyPath out = *this;
    if (!out.steps_.empty()) out.steps_.pop_back();
    return out;
  }
  bool isPrefixOf(const KeyPath& other) const {
    if (steps_.size() > other.steps_.size()) return false;
    return std::equal(steps_.begin(), steps_.end(), other.steps_.begin());
  }
  bool endsWithKeyName() const {
    return !steps_.empty() && std::holds_alternative<KeyName>(steps_.back());
  }
  /// The same path with a trailing KeyName step turned into a Key step.
  KeyPath valuePath() const {
    KeyPath out = *this;
    if (endsWithKeyName()) out.steps_.back() = Key{std::get<KeyName>(out.steps_.back()).name};
    return out;
  }

  /// Wire form: strings are keys, integers are indices, {"keyName": s} is a KeyName step.
  Json toJson() const {
    Json out = Json::array();
    for (const auto& step : steps_) {
      if (auto* k = std::get_if<Key>(&step)) out.push_back(k->name);
      else if (auto* i = std::get_if<Index>(&step)) out.push_back(i->index);
      else out.push_back(Json{{"keyName", std::get<KeyName>(step).name}});
    }
    return out;
  }

  static KeyPath fromJson(const Json& j) {
    if (!j.is_array()) throw Error(ErrorCode::InvalidParams, "keypath must be an array");
    KeyPath out;
    for (const auto& step : j) {
      if (step.is_string()) out.steps_.push_back(Key{step.get<std::string>()});
      else if (step.is_number_unsigned() || (step.is_number_integer() && step.get<std::int64_t>() >= 0))
        out.steps_.push_back(Index{step.get<std::size_t>()});
      else if (step.is_object() && step.contains("keyName") && step["keyName"].is_string())
        out.steps_.push_back(KeyName{step["keyName"].get<std::string>()});
      else
        throw Error(ErrorCode::InvalidParams, "bad keypath step: " + step.dump());
    }
    for (std::size_t i = 0; i + 1 < out.steps_.size(); ++i) {
      if (std::holds_alternative<KeyName>(out.steps_[i]))
        throw Error(ErrorCode::InvalidParams, "keyName step must be last");
    }
    return out;
  }

  std::string toString() const {
    std::string out = "$";
    for (const auto& step : steps_) {
      if (auto* k = std::get_if<Key>(&step)) out += "." + k->name;
      else if (auto* i = std::get_if<Index>(&step)) out += "[" + std::to_string(i->index) + "]";
      else out += ".@" + std::get<KeyName>(step).name;
    }
    return out;
  }

  friend bool operator==(const KeyPath&, const KeyPath&) = default;
  friend bool operator<(const KeyPath& a, const KeyPath& b) { return a.toString() < b.toString(); }

 private:
  std::vector<PathStep> steps_;
};

// ---------------------------------------------------------------------------
// Line index for {line, column} payloads (0-based, columns in bytes).

struct LineColumn {
  std::size_t line = 0;
  std::size_t column = 0;
};

class LineIndex {
 public:
  explicit LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '\n') starts_.push_back(i + 1);
    }
  }
  LineColumn at(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    std::size_t line = static_cast<std::size_t>(it - starts_.begin()) - 1;
    return {line, offset - starts_[line]};
  }

 private:
  std::vector<std::size_t> starts_;
};

// ---------------------------------------------------------------------------
// SyntaxTree

class SyntaxTree {
 public:
  struct Data {
    std::string text;
    std::vector<CstNode> nodes;
    std::vector<ParseDiagnostic> diagnostics;
    NodeId root = kNoNode;
    // Extent of the root value without the leading/trailing trivia that the
    // root range absorbs.
    ByteRange rootValue;
  };

  SyntaxTree() : data_(std::make_shared<Data>()) {}
  explicit SyntaxTree(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  const std::string& text() const { return data_->text; }
  const CstNode& root() const { return data_->nodes[data_->root]; }
  const CstNode& node(NodeId id) const { return data_->nodes.at(id); }
  const std::vector<CstNode>& nodes() const { return data_->nodes; }
  const std::vector<ParseDiagnostic>& diagnostics() const { return data_->diagnostics; }

  bool owns(const CstNode& n) const {
    const auto& v = data_->nodes;
    return !v.empty() && &n >= v.data() && &n < v.data() + v.size();
  }

  std::string_view textOf(const CstNode& n) const {
    return std::string_view(data_->text).substr(n.range.start, n.range.size());
  }

  /// Range of a node's value text: identical to its range except for the
  /// root, whose range is widened to the whole document.
  ByteRange valueRange(const CstNode& n) const {
    return n.id == data_->root ? data_->rootValue : n.range;
  }
  std::string_view valueText(const CstNode& n) const {
    ByteRange r = valueRange(n);
    return std::string_view(data_->text).substr(r.start, r.size());
  }

  bool wellFormed() const {
    return std::none_of(data_->nodes.begin(), data_->nodes.end(), [](const CstNode& n) {
      return n.kind == NodeKind::Error || n.kind == NodeKind::Missing;
    });
  }
  std::size_t countKind(NodeKind kind) const {
    return static_cast<std::size_t>(std::count_if(data_->nodes.begin(), data_->nodes.end(),
                                                  [kind](const CstNode& n) { return n.kind == kind; }));
  }

  /// Property children of an Object, or element slots of an Array.
  std::vector<NodeId> members(const CstNode& container) const {
    std::vector<NodeId> out;
    for (NodeId c : container.children) {
      const CstNode& child = node(c);
      if (container.kind == NodeKind::Object) {
        if (child.kind == NodeKind::Property) out.push_back(c);
      } else if (container.kind == NodeKind::Array) {
        if (!isComment(child.kind) && !child.punctuation) out.push_back(c);
      }
    }
    return out;
  }

  /// The PropertyName child of a Property.
  const CstNode& propertyName(const CstNode& property) const { return node(property.children.front()); }

  /// The value child of a Property (possibly Missing).
  const CstNode& propertyValue(const CstNode& property) const {
    for (auto it = property.children.rbegin(); it != property.children.rend(); ++it) {
      const CstNode& c = node(*it);
      if (!isComment(c.kind) && c.kind != NodeKind::PropertyName) return c;
    }
    return node(property.children.front());
  }

  /// True when the node or one of its ancestors is an Error node.
  bool insideError(const CstNode& n) const {
    for (NodeId id = n.id; id != kNoNode; id = node(id).parent) {
      if (node(id).kind == NodeKind::Error) return true;
    }
    return false;
  }

  std::size_t depth(const CstNode& n) const {
    std::size_t d = 0;
    for (NodeId id = n.parent; id != kNoNode; id = node(id).parent) ++d;
    return d;
  }

 private:
  std::shared_ptr<const Data> data_;
};

// ---------------------------------------------------------------------------
// UTF-8 validation

/// Returns the offset of the first invalid byte, or nullopt for valid UTF-8.
inline std::optional<std::size_t> findInvalidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return i;
    i += len;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

enum class Tok {
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Colon,
  Comma,
  String,
  BadString,
  Number,
  BadNumber,
  True,
  False,
  Null,
  LineComment,
  BlockComment,
  BadComment,
  Word,
  Eof,
};

struct Token {
  Tok kind = Tok::Eof;
  std::size_t start = 0;
  std::size_t end = 0;
  bool unterminated = false;  // BadString only
  std::string decoded;        // String only
};

inline bool isJsonNumber(std::string_view s) {
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < s.size() && s[k] >= '0' && s[k] <= '9'; };
  if (i < s.size() && s[i] == '-') ++i;
  if (!digit(i)) return false;
  if (s[i] == '0') {
    ++i;
  } else {
    while (digit(i)) ++i;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (!digit(i)) return false;
    while (digit(i)) ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (!digit(i)) return false;
    while (digit(i)) ++i;
  }
  return i == s.size();
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skipWhitespace();
    Token t;
    t.start = pos_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::Eof;
      t.end = pos_;
      return t;
    }
    char c = text_[pos_];
    switch (c) {
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case ':': return single(Tok::Colon);
      case ',': return single(Tok::Comma);
      case '"': return string();
      default: break;
    }
    if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
      while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
      t.kind = Tok::LineComment;
      t.end = pos_;
      return t;
    }
    if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
      std::size_t close = text_.find("*/", pos_ + 2);
      if (close == std::string_view::npos) {
        pos_ = text_.size();
        t.kind = Tok::BadComment;
      } else {
        pos_ = close + 2;
        t.kind = Tok::BlockComment;
      }
      t.end = pos_;
      return t;
    }
    return word();
  }

 private:
  static bool isWhitespace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skipWhitespace() {
    while (pos_ < text_.size() && isWhitespace(text_[pos_])) ++pos_;
  }

  Token single(Tok kind) {
    Token t;
    t.kind = kind;
    t.start = pos_;
    t.end = ++pos_;
    return t;
  }

  Token string() {
    Token t;
    t.start = pos_++;
    bool bad = false;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n' || text_[pos_] == '\r') {
        t.kind = Tok::BadString;
        t.unterminated = true;
        t.end = pos_;
        return t;
      }
      char c = text_[pos_];
      if (c == '"') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        if (pos_ + 1 >= text_.size() || text_[pos_ + 1] == '\n' || text_[pos_ + 1] == '\r') {
          ++pos_;
          continue;  // the terminator check above ends the string
        }
        char e = text_[pos_ + 1];
        if (e == 'u') {
          for (std::size_t k = 0; k < 4; ++k) {
            std::size_t at = pos_ + 2 + k;
            if (at >= text_.size() || !std::isxdigit(static_cast<unsigned char>(text_[at]))) bad = true;
          }
        } else if (std::string_view("\"\\/bfnrt").find(e) == std::string_view::npos) {
          bad = true;
        }
        pos_ += 2;
        continue;
      }
      if (static_cast<unsigned char>(c) < 0x20) bad = true;
      ++pos_;
    }
    t.end = pos_;
    if (!bad) {
      try {
        t.decoded = nlohmann::json::parse(text_.substr(t.start, t.end - t.start)).get<std::string>();
      } catch (const nlohmann::json::exception&) {
        bad = true;  // e.g. lone surrogate escapes
      }
    }
    t.kind = bad ? Tok::BadString : Tok::String;
    return t;
  }

  bool startsComment(std::size_t at) const {
    return text_[at] == '/' && at + 1 < text_.size() && (text_[at + 1] == '/' || text_[at + 1] == '*');
  }

  Token word() {
    Token t;
    t.start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (isWhitespace(c) || std::string_view("{}[]:,\"").find(c) != std::string_view::npos) break;
      if (pos_ > t.start && startsComment(pos_)) break;
      ++pos_;
    }
    t.end = pos_;
    std::string_view w = text_.substr(t.start, t.end - t.start);
    if (w == "true") {
      t.kind = Tok::True;
    } else if (w == "false") {
      t.kind = Tok::False;
    } else if (w == "null") {
      t.kind = Tok::Null;
    } else if (!w.empty() && (w[0] == '-' || (w[0] >= '0' && w[0] <= '9'))) {
      t.kind = isJsonNumber(w) ? Tok::Number : Tok::BadNumber;
    } else {
      t.kind = Tok::Word;
    }
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  static constexpr int kMaxDepth = 256;

  explicit Parser(std::string text) : lexer_(std::string_view()) {
    data_ = std::make_shared<SyntaxTree::Data>();
    data_->text = std::move(text);
    lexer_ = Lexer(data_->text);
  }

  std::shared_ptr<SyntaxTree::Data> run() {
    const std::size_t len = data_->text.size();
    advance();
    // Build the top-level sequence under a provisional container; the root
    // is chosen once we know what the document contains.
    NodeId top = makeNode(NodeKind::Error, 0, len, kNoNode);
    flushComments(top);
    if (startsValue(cur_.kind)) {
      NodeId value = parseValue(top, 0);
      flushComments(top);
      if (cur_.kind != Tok::Eof) errorChunk(top, {}, 0, RecoveryCode::UnexpectedToken, "unexpected content after document value");
      flushComments(top);
      promoteRoot(top, value);
    } else if (cur_.kind == Tok::Eof) {
      CstNode& root = at(top);
      root.kind = NodeKind::Missing;
      data_->root = top;
      data_->rootValue = {len, len};
      diagnose({len, len}, RecoveryCode::MissingValue, Severity::Error, "document is empty", top);
    } else {
      while (cur_.kind != Tok::Eof) {
        flushComments(top);
        if (cur_.kind == Tok::Eof) break;
        if (startsValue(cur_.kind)) {
          parseValue(top, 0);
        } else {
          advance();
        }
        flushComments(top);
      }
      data_->root = top;
      data_->rootValue = {0, len};
      diagnose({0, len}, RecoveryCode::UnexpectedToken, Severity::Error, "document does not start with a value", top);
    }
    std::sort(data_->diagnostics.begin(), data_->diagnostics.end(), [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
      return a.range.start != b.range.start ? a.range.start < b.range.start : a.range.end < b.range.end;
    });
    return data_;
  }

 private:
  CstNode& at(NodeId id) { return data_->nodes[id]; }

  NodeId makeNode(NodeKind kind, std::size_t start, std::size_t end, NodeId parent) {
    CstNode n;
    n.kind = kind;
    n.range = {start, end};
    n.id = static_cast<NodeId>(data_->nodes.size());
    n.parent = parent;
    data_->nodes.push_back(std::move(n));
    if (parent != kNoNode) at(parent).children.push_back(data_->nodes.back().id);
    return data_->nodes.back().id;
  }

  void diagnose(ByteRange range, RecoveryCode code, Severity severity, std::string message, NodeId node = kNoNode) {
    data_->diagnostics.push_back({range, code, severity, std::move(message), node});
  }

  void advance() {
    while (true) {
      Token t = lexer_.next();
      if (t.kind == Tok::LineComment || t.kind == Tok::BlockComment || t.kind == Tok::BadComment) {
        pendingComments_.push_back(t);
        continue;
      }
      cur_ = std::move(t);
      lastEnd_ = cur_.start;
      return;
    }
  }

  // Consumes the current token, remembering where it ended.
  void consume() {
    std::size_t end = cur_.end;
    advance();
    consumedEnd_ = end;
  }

  void flushComments(NodeId parent) {
    for (const Token& c : pendingComments_) {
      if (c.kind == Tok::BadComment) {
        NodeId id = makeNode(NodeKind::Error, c.start, c.end, parent);
        at(id).punctuation = true;
        diagnose({c.start, c.end}, RecoveryCode::UnexpectedToken, Severity::Error, "unterminated block comment", id);
      } else {
        makeNode(c.kind == Tok::LineComment ? NodeKind::LineComment : NodeKind::BlockComment, c.start, c.end, parent);
      }
      consumedEnd_ = std::max(consumedEnd_, c.end);
    }
    pendingComments_.clear();
  }

  static bool startsValue(Tok k) {
    switch (k) {
      case Tok::LBrace:
      case Tok::LBracket:
      case Tok::String:
      case Tok::BadString:
      case Tok::Number:
      case Tok::BadNumber:
      case Tok::True:
      case Tok::False:
      case Tok::Null:
      case Tok::Word:
        return true;
      default:
        return false;
    }
  }

  // Where a missing value sits: just before the token that should have been
  // preceded by it, so a caret in the gap lands on the Missing node.
  std::size_t valueGap() const { return cur_.kind == Tok::Eof ? consumedEnd_ : cur_.start; }

  NodeId missing(NodeId parent, std::size_t at, RecoveryCode code, std::string message, bool punctuation) {
    NodeId id = makeNode(NodeKind::Missing, at, at, parent);
    this->at(id).punctuation = punctuation;
    diagnose({at, at}, code, Severity::Error, std::move(message), id);
    return id;
  }

  NodeId errorToken(NodeId parent, RecoveryCode code, std::string message, bool punctuation) {
    NodeId id = makeNode(NodeKind::Error, cur_.start, cur_.end, parent);
    at(id).punctuation = punctuation;
    diagnose({cur_.start, cur_.end}, code, Severity::Error, std::move(message), id);
    consume();
    return id;
  }

  NodeId parseValue(NodeId parent, int depth) {
    flushComments(parent);
    switch (cur_.kind) {
      case Tok::LBrace:
      case Tok::LBracket:
        if (depth >= kMaxDepth) return tooDeep(parent);
        return cur_.kind == Tok::LBrace ? parseObject(parent, depth + 1) : parseArray(parent, depth + 1);
      case Tok::String: {
        NodeId id = makeNode(NodeKind::String, cur_.start, cur_.end, parent);
        at(id).decoded = std::move(cur_.decoded);
        consume();
        return id;
      }
      case Tok::Number: return leaf(NodeKind::Number, parent);
      case Tok::True: return leaf(NodeKind::True, parent);
      case Tok::False: return leaf(NodeKind::False, parent);
      case Tok::Null: return leaf(NodeKind::Null, parent);
      case Tok::BadString:
        return cur_.unterminated ? errorToken(parent, RecoveryCode::UnterminatedString, "unterminated string", false)
                                 : errorToken(parent, RecoveryCode::UnexpectedToken, "invalid string literal", false);
      case Tok::BadNumber: return errorToken(parent, RecoveryCode::UnexpectedToken, "invalid number literal", false);
      case Tok::Word: return errorToken(parent, RecoveryCode::UnexpectedToken, "unexpected word", false);
      default: return missing(parent, valueGap(), RecoveryCode::MissingValue, "expected a value", false);
    }
  }

  NodeId leaf(NodeKind kind, NodeId parent) {
    NodeId id = makeNode(kind, cur_.start, cur_.end, parent);
    consume();
    return id;
  }

  // Nesting beyond kMaxDepth: swallow the bracketed region into one Error node.
  NodeId tooDeep(NodeId parent) {
    NodeId id = makeNode(NodeKind::Error, cur_.start, cur_.start, parent);
    int level = 0;
    do {
      pendingComments_.clear();  // absorbed into the Error range
      if (cur_.kind == Tok::LBrace || cur_.kind == Tok::LBracket) ++level;
      if (cur_.kind == Tok::RBrace || cur_.kind == Tok::RBracket) --level;
      at(id).range.end = cur_.end;
      consume();
    } while (level > 0 && cur_.kind != Tok::Eof);
    diagnose(at(id).range, RecoveryCode::UnexpectedToken, Severity::Error, "nesting too deep", id);
    return id;
  }

  // Panic-mode recovery: an Error node absorbing tokens up to a stop token
  // (or a closing bracket that is not its own). Nested containers become
  // children of the Error node.
  NodeId errorChunk(NodeId parent, std::initializer_list<Tok> stops, int depth, RecoveryCode code, std::string message) {
    NodeId id = makeNode(NodeKind::Error, cur_.start, cur_.start, parent);
    auto isStop = [&](Tok k) { return std::find(stops.begin(), stops.end(), k) != stops.end(); };
    bool first = true;
    while (cur_.kind != Tok::Eof && (first || !isStop(cur_.kind))) {
      flushComments(id);
      if (cur_.kind == Tok::LBrace || cur_.kind == Tok::LBracket) {
        parseValue(id, depth);
      } else {
        consume();
      }
      first = false;
      at(id).range.end = std::max(consumedEnd_, at(at(id).children.empty() ? id : at(id).children.back()).range.end);
    }
    diagnose(at(id).range, code, Severity::Error, std::move(message), id);
    return id;
  }

  NodeId parseObject(NodeId parent, int depth) {
    NodeId obj = makeNode(NodeKind::Object, cur_.start, cur_.end, parent);
    consume();
    bool expecting = true;
    std::optional<ByteRange> comma;
    while (true) {
      flushComments(obj);
      switch (cur_.kind) {
        case Tok::RBrace:
          if (comma) diagnose(*comma, RecoveryCode::TrailingComma, Severity::Warning, "trailing comma");
          consume();
          at(obj).range.end = consumedEnd_;
          return obj;
        case Tok::Eof:
          missing(obj, consumedEnd_, RecoveryCode::UnbalancedBracket, "missing '}'", true);
          at(obj).range.end = consumedEnd_;
          return obj;
        case Tok::Comma:
          if (expecting) {
            errorToken(obj, RecoveryCode::UnexpectedToken, "unexpected ','", true);
          } else {
            comma = ByteRange{cur_.start, cur_.end};
            expecting = true;
            consume();
          }
          break;
        case Tok::String:
          if (!expecting) missing(obj, consumedEnd_, RecoveryCode::MissingComma, "missing ','", true);
          parseProperty(obj, depth);
          expecting = false;
          comma.reset();
          break;
        case Tok::RBracket:
          errorToken(obj, RecoveryCode::UnbalancedBracket, "unexpected ']'", true);
          break;
        default:
          errorChunk(obj, {Tok::RBrace, Tok::Comma, Tok::String}, depth,
                     cur_.kind == Tok::BadString && cur_.unterminated ? RecoveryCode::UnterminatedString
                                                                      : RecoveryCode::UnexpectedToken,
                     "expected a property");
          expecting = false;
          comma.reset();
          break;
      }
    }
  }

  void parseProperty(NodeId obj, int depth) {
    NodeId prop = makeNode(NodeKind::Property, cur_.start, cur_.end, obj);
    NodeId name = makeNode(NodeKind::PropertyName, cur_.start, cur_.end, prop);
    at(name).decoded = std::move(cur_.decoded);
    consume();
    flushComments(prop);
    if (cur_.kind == Tok::Colon) {
      consume();
      flushComments(prop);
      if (startsValue(cur_.kind)) {
        parseValue(prop, depth);
      } else {
        missing(prop, valueGap(), RecoveryCode::MissingValue, "expected a value", false);
      }
    } else {
      missing(prop, consumedEnd_, RecoveryCode::MissingValue, "expected ':'", false);
    }
    at(prop).range.end = at(at(prop).children.back()).range.end;
  }

  NodeId parseArray(NodeId parent, int depth) {
    NodeId arr = makeNode(NodeKind::Array, cur_.start, cur_.end, parent);
    consume();
    bool expecting = true;
    std::optional<ByteRange> comma;
    while (true) {
      flushComments(arr);
      switch (cur_.kind) {
        case Tok::RBracket:
          if (comma) diagnose(*comma, RecoveryCode::TrailingComma, Severity::Warning, "trailing comma");
          consume();
          at(arr).range.end = consumedEnd_;
          return arr;
        case Tok::Eof:
          missing(arr, consumedEnd_, RecoveryCode::UnbalancedBracket, "missing ']'", true);
          at(arr).range.end = consumedEnd_;
          return arr;
        case Tok::Comma:
          if (expecting) missing(arr, consumedEnd_, RecoveryCode::MissingValue, "expected a value", false);
          comma = ByteRange{cur_.start, cur_.end};
          expecting = true;
          consume();
          break;
        case Tok::RBrace:
          errorToken(arr, RecoveryCode::UnbalancedBracket, "unexpected '}'", true);
          break;
        case Tok::Colon:
          errorToken(arr, RecoveryCode::UnexpectedToken, "unexpected ':'", true);
          break;
        default:
          if (!expecting) missing(arr, consumedEnd_, RecoveryCode::MissingComma, "missing ','", true);
          parseValue(arr, depth);
          expecting = false;
          comma.reset();
          break;
      }
    }
  }

  void promoteRoot(NodeId top, NodeId value) {
    // The single top-level value becomes the root; the provisional container's
    // other children (comments, trailing junk) are spliced in around the value's
    // own children so that ordering is preserved.
    std::vector<NodeId> before;
    std::vector<NodeId> after;
    for (NodeId c : at(top).children) {
      if (c == value) continue;
      (at(c).range.start < at(value).range.start ? before : after).push_back(c);
    }
    std::vector<NodeId> kids = before;
    kids.insert(kids.end(), at(value).children.begin(), at(value).children.end());
    kids.insert(kids.end(), after.begin(), after.end());
    for (NodeId c : before) at(c).parent = value;
    for (NodeId c : after) at(c).parent = value;
    data_->rootValue = at(value).range;
    at(value).children = std::move(kids);
    at(value).parent = kNoNode;
    at(value).range = {0, data_->text.size()};
    data_->root = value;
    // Drop the provisional node by turning it into an orphan placeholder at the
    // end: node ids are stable, so swap it out of the tree rather than erase.
    orphan(top);
  }

  void orphan(NodeId id) {
    // Re-index so that the provisional node disappears from the node table.
    std::vector<CstNode>& nodes = data_->nodes;
    std::vector<NodeId> remap(nodes.size());
    std::vector<CstNode> kept;
    kept.reserve(nodes.size() - 1);
    for (NodeId i = 0; i < nodes.size(); ++i) {
      if (i == id) {
        remap[i] = kNoNode;
        continue;
      }
      remap[i] = static_cast<NodeId>(kept.size());
      kept.push_back(std::move(nodes[i]));
    }
    for (CstNode& n : kept) {
      n.id = remap[n.id];
      if (n.parent != kNoNode) n.parent = remap[n.parent];
      for (NodeId& c : n.children) c = remap[c];
    }
    for (ParseDiagnostic& d : data_->diagnostics) {
      if (d.node != kNoNode) d.node = remap[d.node];
    }
    data_->root = remap[data_->root];
    nodes = std::move(kept);
  }

  std::shared_ptr<SyntaxTree::Data> data_;
  Lexer lexer_;
  Token cur_;
  std::vector<Token> pendingComments_;
  std::size_t lastEnd_ = 0;
  std::size_t consumedEnd_ = 0;
};

}  // namespace detail

/// Parses JSONC text. Never fails on valid UTF-8; throws InputEncodingError otherwise.
inline SyntaxTree parse(std::string text) {
  if (auto bad = findInvalidUtf8(text)) {
    throw Error(ErrorCode::InputEncoding, "invalid UTF-8 at byte " + std::to_string(*bad));
  }
  detail::Parser parser(std::move(text));
  return SyntaxTree(parser.run());
}

/// Rebuilds the document from node ranges and the trivia between them.
inline std::string serialize(const SyntaxTree& tree) {
  const std::string& text = tree.text();
  std::string out;
  out.reserve(text.size());
  struct Walker {
    const SyntaxTree& tree;
    const std::string& text;
    std::string& out;
    void visit(const CstNode& n) {
      std::size_t pos = n.range.start;
      for (NodeId c : n.children) {
        const CstNode& child = tree.node(c);
        out.append(text, pos, child.range.start - pos);
        visit(child);
        pos = child.range.end;
      }
      out.append(text, pos, n.range.end - pos);
    }
  };
  Walker{tree, text, out}.visit(tree.root());
  return out;
}

// ---------------------------------------------------------------------------
// Queries over the tree

/// Innermost node containing `offset`. When two siblings touch at the offset,
/// the one starting there wins.
inline const CstNode& nodeAt(const SyntaxTree& tree, std::size_t offset) {
  if (offset > tree.text().size()) {
    throw Error(ErrorCode::Offset, "offset " + std::to_string(offset) + " beyond document length " +
                                       std::to_string(tree.text().size()));
  }
  struct Found {
    const CstNode* node;
    std::size_t depth;
  };
  // Every child containing the offset is explored (at most a few touch it),
  // so the deepest match wins regardless of which sibling it lies under.
  auto descend = [&](auto&& self, const CstNode& n, std::size_t depth) -> Found {
    Found best{&n, depth};
    bool first = true;
    for (NodeId c : n.children) {
      const CstNode& child = tree.node(c);
      if (child.range.start > offset) break;
      if (!child.range.contains(offset)) continue;
      Found f = self(self, child, depth + 1);
      bool starts = f.node->range.start == offset;
      bool bestStarts = best.node->range.start == offset;
      if (first || f.depth > best.depth || (f.depth == best.depth && starts && !bestStarts)) best = f;
      first = false;
    }
    return best;
  };
  return *descend(descend, tree.root(), 0).node;
}

inline KeyPath keyPathOf(const SyntaxTree& tree, const CstNode& node) {
  if (!tree.owns(node)) throw Error(ErrorCode::Node, "node does not belong to this tree");
  std::vector<PathStep> rev;
  const CstNode* n = &node;
  // PropertyName addresses the key token; everything else addresses values.
  if (n->kind == NodeKind::PropertyName && n->parent != kNoNode) {
    rev.push_back(KeyName{n->decoded});
    n = &tree.node(tree.node(n->parent).parent);
  }
  while (n->parent != kNoNode) {
    const CstNode& parent = tree.node(n->parent);
    if (parent.kind == NodeKind::Property) {
      rev.push_back(Key{tree.propertyName(parent).decoded});
      n = &tree.node(parent.parent);
      continue;
    }
    if (n->kind == NodeKind::Property) {
      rev.push_back(Key{tree.propertyName(*n).decoded});
      n = &parent;
      continue;
    }
    if (parent.kind == NodeKind::Array && !isComment(n->kind) && !n->punctuation) {
      auto members = tree.members(parent);
      auto it = std::find(members.begin(), members.end(), n->id);
      rev.push_back(Index{static_cast<std::size_t>(it - members.begin())});
    }
    n = &parent;
  }
  std::reverse(rev.begin(), rev.end());
  return KeyPath(std::move(rev));
}

/// Resolves a path to its node. Duplicate keys resolve to the first occurrence.
inline const CstNode* resolveKeyPath(const SyntaxTree& tree, const KeyPath& path) {
  const CstNode* n = &tree.root();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const PathStep& step = path[i];
    if (auto* idx = std::get_if<Index>(&step)) {
      if (n->kind != NodeKind::Array) return nullptr;
      auto members = tree.members(*n);
      if (idx->index >= members.size()) return nullptr;
      n = &tree.node(members[idx->index]);
      continue;
    }
    if (n->kind != NodeKind::Object) return nullptr;
    const bool keyName = std::holds_alternative<KeyName>(step);
    if (keyName && i + 1 != path.size()) return nullptr;
    const std::string& name = keyName ? std::get<KeyName>(step).name : std::get<Key>(step).name;
    const CstNode* found = nullptr;
    for (NodeId m : tree.members(*n)) {
      const CstNode& prop = tree.node(m);
      if (tree.propertyName(prop).decoded == name) {
        found = keyName ? &tree.propertyName(prop) : &tree.propertyValue(prop);
        break;
      }
    }
    if (!found) return nullptr;
    n = found;
  }
  return n;
}

/// Lossy value view of a node: comments dropped, first duplicate key wins,
/// Error and Missing nodes read as null.
inline Json toJson(const SyntaxTree& tree, const CstNode& node) {
  switch (node.kind) {
    case NodeKind::Object: {
      Json out = Json::object();
      for (NodeId m : tree.members(node)) {
        const CstNode& prop = tree.node(m);
        const std::string& name = tree.propertyName(prop).decoded;
        if (!out.contains(name)) out[name] = toJson(tree, tree.propertyValue(prop));
      }
      return out;
    }
    case NodeKind::Array: {
      Json out = Json::array();
      for (NodeId m : tree.members(node)) out.push_back(toJson(tree, tree.node(m)));
      return out;
    }
    case NodeKind::Property: return toJson(tree, tree.propertyValue(node));
    case NodeKind::String:
    case NodeKind::PropertyName: return node.decoded;
    case NodeKind::Number: {
      std::string text(tree.valueText(node));
      try {
        return Json::parse(text);
      } catch (const nlohmann::json::out_of_range&) {
        return std::strtod(text.c_str(), nullptr);  // beyond double range: +-inf
      }
    }
    case NodeKind::True: return true;
    case NodeKind::False: return false;
    default: return nullptr;
  }
}

inline Json toJson(const SyntaxTree& tree) { return toJson(tree, tree.root()); }

}  // namespace projedit
