#pragma once
#include <stdexcept>
#include <string>

namespace dr {

enum class ErrorKind {
  InvalidKernel,
  DimensionMismatch,
  WindowTooLarge,
  UnsupportedFormat,
  CodecError,
  InvalidParam,
  InvalidRegion,
  EmptyCorpus,
  ImageTooSmall,
  UnparseableResponse,
  BackendUnavailable,
  BackendError,
  BackendTimeout,
  BackendProtocolError,
  MaskTooLarge,
  KernelTooLarge,
  ImageTooLarge,
  ClassificationFailed,
  PipelineTimeout,
  EmptyBatch,
  ConfigError,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}
  Error(ErrorKind kind, const std::string& message, int code)
      : Error(kind, message) {
    code_ = code;
  }

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }
  // status / exit code for BackendError, 0 otherwise
  int code() const { return code_; }

 private:
  ErrorKind kind_;
  int code_ = 0;
};

}  // namespace dr
