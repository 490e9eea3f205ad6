#ifndef TFS_ERRORS_HPP
#define TFS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tfs {

enum class ErrorKind {
  SyntaxError,
  CycleInHierarchy,
  MissingRoot,
  NonUniqueGLB,
  FeatureIntroductionViolation,
  NonMonotonicApprop,
  UnknownType,
  UnknownFeature,
  FeatureNotAppropriate,
  InconsistentConstraint,
  DisjunctLimitExceeded,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::CycleInHierarchy: return "CycleInHierarchy";
    case ErrorKind::MissingRoot: return "MissingRoot";
    case ErrorKind::NonUniqueGLB: return "NonUniqueGLB";
    case ErrorKind::FeatureIntroductionViolation: return "FeatureIntroductionViolation";
    case ErrorKind::NonMonotonicApprop: return "NonMonotonicApprop";
    case ErrorKind::UnknownType: return "UnknownType";
    case ErrorKind::UnknownFeature: return "UnknownFeature";
    case ErrorKind::FeatureNotAppropriate: return "FeatureNotAppropriate";
    case ErrorKind::InconsistentConstraint: return "InconsistentConstraint";
    case ErrorKind::DisjunctLimitExceeded: return "DisjunctLimitExceeded";
  }
  return "?";
}

/// All grammar-level failures (load, parse, compile) are reported with this
/// exception. Unification failure is a value (see fstruct.hpp), not an error.
class GrammarError : public std::runtime_error {
 public:
  GrammarError(ErrorKind kind, std::string msg, int line = 0, int col = 0)
      : std::runtime_error(format(kind, msg, line, col)),
        kind_(kind), line_(line), col_(col) {}

  ErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  static std::string format(ErrorKind kind, const std::string& msg, int line, int col) {
    std::string s = to_string(kind);
    if (line > 0) {
      s += " at " + std::to_string(line) + ":" + std::to_string(col);
    }
    s += ": " + msg;
    return s;
  }

  ErrorKind kind_;
  int line_, col_;
};

}  // namespace tfs

#endif  // TFS_ERRORS_HPP
