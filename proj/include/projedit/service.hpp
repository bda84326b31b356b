#pragma once

// JSON-RPC 2.0 service over document sessions. Transport-agnostic: feed it
// request objects or newline-delimited lines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include "projedit/edit.hpp"
#include "projedit/error.hpp"
#include "projedit/jsonc.hpp"
#include "projedit/menu.hpp"
#include "projedit/projection.hpp"
#include "projedit/schema.hpp"
#include "projedit/tracery.hpp"

namespace projedit {

namespace rpc {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;

inline int codeFor(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidParams: return kInvalidParams;
    case ErrorCode::StaleVersion: return -32001;
    case ErrorCode::ExpiredAction: return -32002;
    case ErrorCode::UnknownDocument: return -32003;
    case ErrorCode::DuplicateDocument: return -32004;
    case ErrorCode::SchemaRef: return -32010;
    case ErrorCode::UnsupportedRef: return -32011;
    case ErrorCode::Offset: return -32020;
    case ErrorCode::Path: return -32021;
    case ErrorCode::Kind: return -32022;
    case ErrorCode::EditConflict: return -32023;
    case ErrorCode::NoEdit: return -32024;
    case ErrorCode::Node: return -32025;
    case ErrorCode::Registry: return -32030;
    case ErrorCode::Symbol: return -32040;
    case ErrorCode::Recursion: return -32041;
    case ErrorCode::TraceStale: return -32042;
    case ErrorCode::InputEncoding: return -32050;
  }
  return kInternalError;
}
}  // namespace rpc

struct ServiceOptions {
  // Relative schemaRef paths resolve against this directory.
  std::filesystem::path schemaRoot = ".";
};

class Service {
 public:
  explicit Service(ServiceOptions options = {}) : options_(std::move(options)) {}

  /// Handles one decoded request. Returns null for notifications.
  Json handle(const Json& request) {
    Json id = nullptr;
    if (request.is_object() && request.contains("id")) id = request["id"];
    if (!request.is_object() || request.value("jsonrpc", "") != "2.0" || !request.contains("method") ||
        !request["method"].is_string())
      return errorResponse(id, rpc::kInvalidRequest, "invalid request", nullptr);
    bool notification = !request.contains("id");
    const std::string method = request["method"].get<std::string>();
    Json params = request.value("params", Json::object());
    Json response;
    try {
      auto it = methods().find(method);
      if (it == methods().end()) {
        response = errorResponse(id, rpc::kMethodNotFound, "method not found: " + method, nullptr);
      } else {
        if (!params.is_object()) throw Error(ErrorCode::InvalidParams, "params must be an object");
        response = {{"jsonrpc", "2.0"}, {"id", id}, {"result", (this->*(it->second))(params)}};
      }
    } catch (const Error& e) {
      response = errorResponse(id, rpc::codeFor(e.code()), e.what(), Json{{"name", errorName(e.code())}});
    } catch (const nlohmann::json::exception& e) {
      response = errorResponse(id, rpc::kInvalidParams, std::string("invalid params: ") + e.what(), nullptr);
    } catch (const std::exception& e) {
      response = errorResponse(id, rpc::kInternalError, e.what(), nullptr);
    }
    return notification ? Json(nullptr) : response;
  }

  /// One request line in, one response line out (empty for notifications).
  std::string handleLine(std::string_view line) {
    Json request;
    try {
      request = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      return errorResponse(nullptr, rpc::kParseError, std::string("parse error: ") + e.what(), nullptr).dump();
    }
    if (request.is_array()) {
      // batch
      Json out = Json::array();
      for (const auto& r : request)
        if (Json resp = handle(r); !resp.is_null()) out.push_back(std::move(resp));
      if (request.empty()) return errorResponse(nullptr, rpc::kInvalidRequest, "empty batch", nullptr).dump();
      return out.empty() ? "" : out.dump();
    }
    Json resp = handle(request);
    return resp.is_null() ? "" : resp.dump();
  }

  /// Newline-delimited JSON-RPC until end of input.
  void serveStream(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::string resp = handleLine(line);
      if (!resp.empty()) out << resp << '\n' << std::flush;
    }
  }

 private:
  struct Session {
    std::mutex mutex;
    std::string docId;
    std::optional<SyntaxTree> tree;
    SchemaPtr schema;
    ViewRegistry registry;
    std::uint64_t version = 0;
    std::map<std::string, EditAction> actions;  // refs served at `version`
    std::map<std::string, tracery::ExpansionTrace> traces;

    const SyntaxTree& t() const { return *tree; }
  };

  using Handler = Json (Service::*)(const Json&);

  static const std::map<std::string, Handler>& methods() {
    static const std::map<std::string, Handler> m = {
        {"doc/open", &Service::open},
        {"doc/close", &Service::close},
        {"doc/get", &Service::get},
        {"doc/update", &Service::update},
        {"doc/menu", &Service::menu},
        {"doc/applyAction", &Service::applyActionRpc},
        {"doc/anchors", &Service::anchors},
        {"schema/search", &Service::search},
        {"tracery/expand", &Service::traceryExpand},
        {"tracery/reverseEdit", &Service::traceryReverse},
    };
    return m;
  }

  static Json errorResponse(const Json& id, int code, const std::string& message, const Json& data) {
    Json err{{"code", code}, {"message", message}};
    if (!data.is_null()) err["data"] = data;
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", err}};
  }

  // --- parameter helpers ----------------------------------------------------

  static const Json& need(const Json& p, const char* key) {
    if (!p.contains(key)) throw Error(ErrorCode::InvalidParams, std::string("missing parameter '") + key + "'");
    return p[key];
  }
  static std::string needString(const Json& p, const char* key) {
    const Json& v = need(p, key);
    if (!v.is_string()) throw Error(ErrorCode::InvalidParams, std::string("parameter '") + key + "' must be a string");
    return v.get<std::string>();
  }
  static std::uint64_t needUnsigned(const Json& p, const char* key) {
    const Json& v = need(p, key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw Error(ErrorCode::InvalidParams, std::string("parameter '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::shared_ptr<Session> session(const Json& p) {
    std::string id = needString(p, "docId");
    std::lock_guard<std::mutex> lock(sessionsMutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownDocument, "no open document '" + id + "'");
    return it->second;
  }

  static void checkVersion(const Session& s, const Json& p) {
    std::uint64_t base = needUnsigned(p, "baseVersion");
    if (base != s.version)
      throw Error(ErrorCode::StaleVersion,
                  "baseVersion " + std::to_string(base) + " is not the current version " + std::to_string(s.version));
  }

  // --- payload helpers ------------------------------------------------------

  static Json rangeJson(const LineIndex& lines, ByteRange r) {
    auto a = lines.at(r.start), b = lines.at(r.end);
    return {{"start", r.start}, {"end", r.end}, {"startLine", a.line}, {"startColumn", a.column},
            {"endLine", b.line}, {"endColumn", b.column}};
  }

  static Json diagnostics(const Session& s) {
    const SyntaxTree& tree = s.t();
    LineIndex lines(tree.text());
    Json out = Json::array();
    for (const auto& d : tree.diagnostics())
      out.push_back({{"source", "parser"}, {"severity", severityName(d.severity)}, {"code", recoveryName(d.code)},
                     {"message", d.message}, {"range", rangeJson(lines, d.range)}});
    if (s.schema)
      for (const auto& d : validate(tree, *s.schema)) {
        const CstNode* n = resolveKeyPath(tree, d.keyPath);
        ByteRange r = n ? tree.valueRange(*n) : tree.valueRange(tree.root());
        out.push_back({{"source", "schema"}, {"severity", severityName(d.severity)}, {"code", d.rule}, {"message", d.message},
                       {"keyPath", d.keyPath.toJson()}, {"range", rangeJson(lines, r)}});
      }
    return out;
  }

  static std::string status(const Session& s) {
    return s.t().root().kind == NodeKind::Error ? "viewsDeactivated" : "ok";
  }

  static Json editsJson(const std::string& before, const std::vector<TextEdit>& edits) {
    LineIndex lines(before);
    Json out = Json::array();
    for (const auto& e : edits) out.push_back({{"range", rangeJson(lines, e.range)}, {"newText", e.newText}});
    return out;
  }

  static std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
  }

  void setText(Session& s, std::string text) {
    s.tree.emplace(parse(std::move(text)));
    ++s.version;
    s.actions.clear();
    s.traces.clear();
  }

  SchemaPtr loadSchemaRef(const Json& ref) {
    if (ref.is_null()) return nullptr;
    if (ref.is_object() || ref.is_boolean()) return loadSchema(ref.dump(), "inline");
    if (!ref.is_string()) throw Error(ErrorCode::InvalidParams, "schemaRef must be a path or an inline schema");
    std::filesystem::path path = ref.get<std::string>();
    if (path.is_relative()) path = options_.schemaRoot / path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::SchemaRef, "cannot read schema '" + ref.get<std::string>() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return loadSchema(buf.str(), ref.get<std::string>());
  }

  static ViewRegistry registryFrom(const Json& manifest) {
    if (manifest.is_null()) return builtinRegistry();
    if (!manifest.is_object()) throw Error(ErrorCode::InvalidParams, "viewManifest must be an object");
    std::vector<std::string> removed = manifest.value("remove", std::vector<std::string>{});
    ViewRegistry r = builtinRegistry(removed);
    for (const auto& v : manifest.value("views", Json::array())) {
      if (v.contains("builtin")) {
        std::string name = v["builtin"].get<std::string>();
        if (name != "quietQuote") throw Error(ErrorCode::Registry, "unknown builtin view '" + name + "'");
        r = registerView(r, quietQuoteView(v.value("id", name)));
      } else {
        r = registerView(r, ViewSpec::fromJson(v));
      }
    }
    return r;
  }

  // --- methods --------------------------------------------------------------

  Json open(const Json& p) {
    std::string id = needString(p, "docId");
    auto s = std::make_shared<Session>();
    s->docId = id;
    s->schema = loadSchemaRef(p.value("schemaRef", Json(nullptr)));
    s->registry = registryFrom(p.value("viewManifest", Json(nullptr)));
    setText(*s, p.contains("text") ? needString(p, "text") : std::string());
    {
      std::lock_guard<std::mutex> lock(sessionsMutex_);
      if (!sessions_.emplace(id, s).second) throw Error(ErrorCode::DuplicateDocument, "document '" + id + "' is already open");
    }
    std::lock_guard<std::mutex> lock(s->mutex);
    return {{"docId", id}, {"version", s->version}, {"diagnostics", diagnostics(*s)}, {"status", status(*s)}};
  }

  Json close(const Json& p) {
    std::string id = needString(p, "docId");
    std::lock_guard<std::mutex> lock(sessionsMutex_);
    if (!sessions_.erase(id)) throw Error(ErrorCode::UnknownDocument, "no open document '" + id + "'");
    return {{"docId", id}, {"closed", true}};
  }

  Json get(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    return {{"docId", s->docId}, {"version", s->version}, {"text", s->t().text()}};
  }

  Json update(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    checkVersion(*s, p);
    std::vector<TextEdit> edits;
    for (const auto& e : need(p, "edits")) edits.push_back(TextEdit::fromJson(e));
    std::string text = apply(s->t().text(), edits);
    setText(*s, std::move(text));
    return {{"version", s->version}, {"diagnostics", diagnostics(*s)}, {"status", status(*s)}};
  }

  Json menu(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    std::size_t offset = needUnsigned(p, "offset");
    const SyntaxTree& tree = s->t();
    if (offset > tree.text().size()) throw Error(ErrorCode::Offset, "offset past end of document");
    Menu m = menuFor(tree, s->schema, s->registry, offset);
    std::string query = p.value("query", "");
    if (query.empty()) query = extractQueryAtCursor(tree, offset);
    if (!query.empty()) m = filterMenu(m, query);
    Json items = Json::array();
    for (const auto& item : m.items) {
      Json j = item.toJson();
      if (item.action) {
        std::string ref = "v" + std::to_string(s->version) + "-" + hex(tracery::fnv1a(item.action->toJson().dump()));
        s->actions[ref] = *item.action;
        j["actionRef"] = ref;
      }
      items.push_back(std::move(j));
    }
    return {{"version", s->version}, {"anchorPath", m.anchorPath.toJson()}, {"query", query}, {"items", items},
            {"typeInfo", m.typeInfo}};
  }

  Json applyActionRpc(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    checkVersion(*s, p);
    EditAction action;
    if (p.contains("actionRef")) {
      auto it = s->actions.find(needString(p, "actionRef"));
      if (it == s->actions.end())
        throw Error(ErrorCode::ExpiredAction, "actionRef was not served for version " + std::to_string(s->version));
      action = it->second;
    } else {
      action = EditAction::fromJson(need(p, "action"));
    }
    std::vector<std::string> warnings;
    std::string before = s->t().text();
    auto edits = compile(s->t(), action, &warnings);
    Json editJson = editsJson(before, edits);
    if (!edits.empty()) setText(*s, apply(before, edits));
    return {{"version", s->version}, {"edits", editJson}, {"warnings", warnings}, {"diagnostics", diagnostics(*s)},
            {"status", status(*s)}};
  }

  Json anchors(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    ResolveOptions opts;
    for (const auto& r : p.value("suggestionRanges", Json::array()))
      opts.suggestionRanges.push_back({r.at("start").get<std::size_t>(), r.at("end").get<std::size_t>()});
    auto result = resolveAnchors(s->t(), s->schema, s->registry, opts);
    LineIndex lines(s->t().text());
    Json list = Json::array();
    for (const auto& a : result.anchors) {
      Json j = a.toJson();
      j["nodeRange"] = rangeJson(lines, a.nodeRange);
      list.push_back(std::move(j));
    }
    return {{"version", s->version}, {"status", result.status == AnchorStatus::Ok ? "ok" : "viewsDeactivated"},
            {"anchors", list}};
  }

  Json search(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    std::string query = needString(p, "query");
    if (query.empty()) throw Error(ErrorCode::InvalidParams, "query must not be empty");
    std::size_t limit = p.contains("limit") ? needUnsigned(p, "limit") : 20;
    if (limit == 0) throw Error(ErrorCode::InvalidParams, "limit must be positive");
    if (!s->schema) throw Error(ErrorCode::SchemaRef, "document has no schema");
    Json out = Json::array();
    for (const auto& sug : schemaSearch(s->t(), s->schema, query, limit)) out.push_back(sug.toJson());
    return {{"version", s->version}, {"suggestions", out}};
  }

  Json traceryExpand(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    std::uint64_t seed = needUnsigned(p, "seed");
    std::size_t depth = p.contains("depthLimit") ? needUnsigned(p, "depthLimit") : tracery::kDefaultDepthLimit;
    auto grammar = tracery::Grammar::fromTree(s->t(), p.value("startSymbol", "origin"));
    auto trace = tracery::expand(grammar, seed, depth);
    std::string traceId = "t" + std::to_string(s->version) + "-" + std::to_string(seed) + "-" + std::to_string(depth);
    Json result{{"version", s->version}, {"output", trace.output}, {"traceId", traceId}, {"trace", trace.root.toJson()}};
    s->traces[traceId] = std::move(trace);
    return result;
  }

  Json traceryReverse(const Json& p) {
    auto s = session(p);
    std::lock_guard<std::mutex> lock(s->mutex);
    std::string traceId = needString(p, "traceId");
    auto it = s->traces.find(traceId);
    if (it == s->traces.end()) throw Error(ErrorCode::TraceStale, "trace '" + traceId + "' is not valid for version " + std::to_string(s->version));
    auto grammar = tracery::Grammar::fromTree(s->t(), p.value("startSymbol", "origin"));
    auto result = tracery::synthesize(grammar, it->second, needString(p, "editedOutput"));
    Json j = result.toJson();
    j["version"] = s->version;
    if (result.grammarEdit) j["action"] = result.grammarEdit->toAction().toJson();
    return j;
  }

  ServiceOptions options_;
  std::mutex sessionsMutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace projedit
