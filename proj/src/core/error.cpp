#include "wassbary/error.hpp"

#include <sstream>

namespace wassbary {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Representation: return "representation error";
    case ErrorKind::Conditioning: return "conditioning error";
    case ErrorKind::Capacity: return "capacity error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {
std::string with_eigenvalue(const std::string& what, double lambda) {
  std::ostringstream os;
  os << what << " (smallest eigenvalue " << lambda << ")";
  return os.str();
}
}  // namespace

ConditioningError::ConditioningError(const std::string& what, double smallest_eigenvalue)
    : Error(ErrorKind::Conditioning, with_eigenvalue(what, smallest_eigenvalue)),
      smallest_eigenvalue_(smallest_eigenvalue) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wassbary
