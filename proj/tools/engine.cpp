#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "projedit/service.hpp"
#include "projedit/websocket.hpp"

using namespace projedit;

namespace {

std::shared_ptr<spdlog::logger> makeLogger() {
  auto logger = spdlog::stderr_logger_mt("engine");
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  const char* env = std::getenv("ENGINE_LOG");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
  return logger;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidParams, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs one request against the service and returns its result, throwing on
// an RPC error so the CLI reports it uniformly.
Json call(Service& svc, const std::string& method, Json params) {
  Json resp = svc.handle({{"jsonrpc", "2.0"}, {"id", 1}, {"method", method}, {"params", std::move(params)}});
  if (resp.contains("error")) throw std::runtime_error(resp["error"].dump());
  return resp["result"];
}

Json openParams(const std::string& text, const std::string& schema) {
  Json p{{"docId", "cli"}, {"text", text}};
  if (!schema.empty()) p["schemaRef"] = schema;
  return p;
}

std::atomic<bool> interrupted{false};

}  // namespace

int main(int argc, char** argv) {
  auto log = makeLogger();
  CLI::App app{"Headless projectional editing engine for JSON documents"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Serve JSON-RPC over WebSocket or stdio");
  unsigned short port = 8765;
  bool useStdio = false;
  std::string uiDir, schemaRoot = ".";
  serve->add_option("--port", port, "WebSocket port");
  serve->add_flag("--stdio", useStdio, "Newline-delimited JSON-RPC on stdin/stdout");
  serve->add_option("--ui", uiDir, "Static UI bundle served over HTTP on the same port")->check(CLI::ExistingDirectory);
  serve->add_option("--schema-root", schemaRoot, "Directory for relative schemaRef paths")->check(CLI::ExistingDirectory);

  std::string file, schema;
  auto* check = app.add_subcommand("check", "Print diagnostics as JSON lines; exit 1 on any error");
  check->add_option("file", file)->required()->check(CLI::ExistingFile);
  check->add_option("--schema", schema)->check(CLI::ExistingFile);

  std::size_t offset = 0;
  std::string query;
  auto* menu = app.add_subcommand("menu", "Print the menu at a byte offset");
  menu->add_option("file", file)->required()->check(CLI::ExistingFile);
  menu->add_option("--schema", schema)->check(CLI::ExistingFile);
  menu->add_option("--offset", offset)->required();
  menu->add_option("--query", query, "Filter text (default: taken from the cursor)");

  std::size_t limit = 20;
  auto* search = app.add_subcommand("search", "Search a schema for a term; one suggestion per line");
  search->add_option("--schema", schema)->required()->check(CLI::ExistingFile);
  search->add_option("--query", query)->required();
  search->add_option("--limit", limit);
  search->add_option("--file", file, "Document to insert into (default: {})")->check(CLI::ExistingFile);

  auto* tracery = app.add_subcommand("tracery", "Tracery grammar tools");
  tracery->require_subcommand(1);
  std::uint64_t seed = 0;
  std::size_t depth = tracery::kDefaultDepthLimit;
  bool showTrace = false;
  auto* expand = tracery->add_subcommand("expand", "Expand a grammar with a seed");
  expand->add_option("file", file)->required()->check(CLI::ExistingFile);
  expand->add_option("--seed", seed)->required();
  expand->add_option("--depth", depth);
  expand->add_flag("--trace", showTrace, "Print the expansion trace as JSON");

  std::string transcript;
  auto* record = app.add_subcommand("record", "Run request lines and print a transcript");
  record->add_option("requests", transcript)->required()->check(CLI::ExistingFile);
  record->add_option("--schema-root", schemaRoot)->check(CLI::ExistingDirectory);
  auto* replay = app.add_subcommand("replay", "Replay a transcript; exit 1 on any differing response");
  replay->add_option("transcript", transcript)->required()->check(CLI::ExistingFile);
  replay->add_option("--schema-root", schemaRoot)->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      Service svc(ServiceOptions{schemaRoot});
      if (useStdio) {
        log->info("serving on stdio");
        svc.serveStream(std::cin, std::cout);
        return 0;
      }
      WebSocketServer server(svc, uiDir, [&](const std::string& m) { log->info(m); });
      unsigned short bound = server.start(port);
      log->info("listening on ws://127.0.0.1:{}", bound);
      std::signal(SIGINT, [](int) { interrupted = true; });
      std::signal(SIGTERM, [](int) { interrupted = true; });
      while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return 0;
    }
    Service svc;
    if (check->parsed()) {
      Json r = call(svc, "doc/open", openParams(slurp(file), schema));
      bool errors = false;
      for (const auto& d : r["diagnostics"]) {
        std::cout << d.dump() << '\n';
        errors |= d["severity"] == "error";
      }
      log->info("{} diagnostics", r["diagnostics"].size());
      return errors ? 1 : 0;
    }
    if (menu->parsed()) {
      call(svc, "doc/open", openParams(slurp(file), schema));
      Json p{{"docId", "cli"}, {"offset", offset}};
      if (!query.empty()) p["query"] = query;
      std::cout << call(svc, "doc/menu", p).dump(2) << '\n';
      return 0;
    }
    if (search->parsed()) {
      call(svc, "doc/open", openParams(file.empty() ? "{}" : slurp(file), schema));
      Json r = call(svc, "schema/search", {{"docId", "cli"}, {"query", query}, {"limit", limit}});
      for (const auto& s : r["suggestions"]) std::cout << s.dump() << '\n';
      return 0;
    }
    if (expand->parsed()) {
      call(svc, "doc/open", openParams(slurp(file), ""));
      Json r = call(svc, "tracery/expand", {{"docId", "cli"}, {"seed", seed}, {"depthLimit", depth}});
      std::cout << (showTrace ? r["trace"].dump(2) : r["output"].get<std::string>()) << '\n';
      return 0;
    }
    if (record->parsed() || replay->parsed()) {
      Service rs(ServiceOptions{schemaRoot});
      std::ifstream in(transcript);
      std::string line;
      int n = 0, mismatches = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (record->parsed()) {
          std::cout << Json{{"request", line}, {"response", rs.handleLine(line)}}.dump() << '\n';
        } else {
          Json entry = Json::parse(line);
          std::string got = rs.handleLine(entry["request"].get<std::string>());
          if (got != entry["response"].get<std::string>()) {
            ++mismatches;
            std::cerr << "mismatch at request " << n + 1 << "\n  expected " << entry["response"].get<std::string>()
                      << "\n  got      " << got << '\n';
          }
        }
        ++n;
      }
      if (replay->parsed()) std::cout << n << " requests, " << mismatches << " mismatches\n";
      return mismatches ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
