#ifndef CSSLAB_ERRORS_H_
#define CSSLAB_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace csslab {

enum class ErrorKind {
  kValidation,
  kSchedule,
  kGeneration,
  kStream,
  kFormat,
  kShape,
  kState,
  kLoss,
  kRange,
  kNumeric,
  kConfig,
  kProbe,
  kPrototype,
  kCosine,
  kArtifact,
  kComparison,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every error carries the module that raised it; what() reads
// "<module>: <kind> error: <detail>".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string module_;
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace csslab

#endif  // CSSLAB_ERRORS_H_
