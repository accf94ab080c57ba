#include "csslab/errors.h"

namespace csslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kSchedule: return "schedule";
    case ErrorKind::kGeneration: return "generation";
    case ErrorKind::kStream: return "stream";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kState: return "state";
    case ErrorKind::kLoss: return "loss";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kProbe: return "probe";
    case ErrorKind::kPrototype: return "prototype";
    case ErrorKind::kCosine: return "cosine";
    case ErrorKind::kArtifact: return "artifact";
    case ErrorKind::kComparison: return "comparison";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(std::string_view module, ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(module) + ": " +
                         std::string(to_string(kind)) + " error: " + detail),
      module_(module),
      kind_(kind),
      detail_(detail) {}

}  // namespace csslab
