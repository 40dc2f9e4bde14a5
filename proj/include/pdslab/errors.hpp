#ifndef PDSLAB_ERRORS_HPP
#define PDSLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdslab {

// Base class for everything thrown on purpose by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- linear algebra kernel ---
class NotSquare : public Error {
  public:
    explicit NotSquare(const std::string& msg) : Error(msg) {}
};
class NonConvergence : public Error {
  public:
    explicit NonConvergence(const std::string& msg) : Error(msg) {}
};
class OverflowRisk : public Error {
  public:
    explicit OverflowRisk(const std::string& msg) : Error(msg) {}
};
class SpectralGapViolation : public Error {
  public:
    explicit SpectralGapViolation(const std::string& msg) : Error(msg) {}
};
class DimensionMismatch : public Error {
  public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// --- system definition / hypotheses ---
class KernelDimensionUnsupported : public Error {
  public:
    explicit KernelDimensionUnsupported(const std::string& msg) : Error(msg) {}
};
class UnknownName : public Error {
  public:
    explicit UnknownName(const std::string& msg) : Error(msg) {}
};
class ParseError : public Error {
  public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// --- symbol algebra / hierarchy ---
class DegenerateData : public Error {
  public:
    explicit DegenerateData(const std::string& msg) : Error(msg) {}
};
class TruncationOverflow : public Error {
  public:
    explicit TruncationOverflow(const std::string& msg) : Error(msg) {}
};
class ContinuationFailure : public Error {
  public:
    explicit ContinuationFailure(const std::string& msg) : Error(msg) {}
};
class ZoneCollapse : public Error {
  public:
    explicit ZoneCollapse(const std::string& msg) : Error(msg) {}
};
class PositivityViolation : public Error {
  public:
    explicit PositivityViolation(const std::string& msg) : Error(msg) {}
};

// --- integration / solvers ---
class StepUnderflow : public Error {
  public:
    explicit StepUnderflow(const std::string& msg) : Error(msg) {}
};
class ToleranceUnreachable : public Error {
  public:
    explicit ToleranceUnreachable(const std::string& msg) : Error(msg) {}
};
class QuadratureFailure : public Error {
  public:
    explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};
class NonContraction : public Error {
  public:
    explicit NonContraction(const std::string& msg) : Error(msg) {}
};
class TailNotIntegrable : public Error {
  public:
    explicit TailNotIntegrable(const std::string& msg) : Error(msg) {}
};

// --- lyapunov ---
class NoAdmissibleEpsilon : public Error {
  public:
    explicit NoAdmissibleEpsilon(const std::string& msg) : Error(msg) {}
};

// --- experiments ---
class UnsupportedPair : public Error {
  public:
    explicit UnsupportedPair(const std::string& msg) : Error(msg) {}
};

}  // namespace pdslab

#endif
