#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projedit {

/// Stable error identifiers. The service layer maps each to a JSON-RPC code.
enum class ErrorCode {
  InputEncoding,
  Offset,
  Node,
  SchemaRef,
  UnsupportedRef,
  Path,
  Kind,
  EditConflict,
  Registry,
  Symbol,
  Recursion,
  NoEdit,
  TraceStale,
  StaleVersion,
  ExpiredAction,
  UnknownDocument,
  DuplicateDocument,
  InvalidParams,
};

inline std::string_view errorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::InputEncoding: return "InputEncodingError";
    case ErrorCode::Offset: return "OffsetError";
    case ErrorCode::Node: return "NodeError";
    case ErrorCode::SchemaRef: return "SchemaRefError";
    case ErrorCode::UnsupportedRef: return "UnsupportedRefError";
    case ErrorCode::Path: return "PathError";
    case ErrorCode::Kind: return "KindError";
    case ErrorCode::EditConflict: return "EditConflictError";
    case ErrorCode::Registry: return "RegistryError";
    case ErrorCode::Symbol: return "SymbolError";
    case ErrorCode::Recursion: return "RecursionError";
    case ErrorCode::NoEdit: return "NoEditError";
    case ErrorCode::TraceStale: return "TraceStaleError";
    case ErrorCode::StaleVersion: return "StaleVersionError";
    case ErrorCode::ExpiredAction: return "ExpiredActionError";
    case ErrorCode::UnknownDocument: return "UnknownDocumentError";
    case ErrorCode::DuplicateDocument: return "DuplicateDocumentError";
    case ErrorCode::InvalidParams: return "InvalidParamsError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace projedit
