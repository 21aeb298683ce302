#ifndef EPDIFF_ERRORS_HPP
#define EPDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epdiff {

/** Thrown when a spectral round trip that must produce a real field comes
 * back with an imaginary part above the reality tolerance. This signals a
 * conjugation-convention bug inside the library, never a user error, so it
 * derives from logic_error. */
class internal_error : public std::logic_error {
  public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

/** Thrown when a brute-force operation (dense rank-3 tensor assembly) is
 * requested at a size whose cost grows like P^5 and would exhaust memory or
 * time; the guard is deliberate, not a heuristic. */
class resource_limit_error : public std::runtime_error {
  public:
    explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

/** Thrown by the flat pairing when an operand does not carry the factored
 * (stripped-row) form the pairing is defined on. */
class unsupported_operand : public std::invalid_argument {
  public:
    explicit unsupported_operand(const std::string& what) : std::invalid_argument(what) {}
};

/** Thrown when a time rule is recognized but deliberately unsupported
 * (the midpoint rule produces third-order terms in the update and is
 * outside this library's scope). */
class unsupported_scheme : public std::invalid_argument {
  public:
    explicit unsupported_scheme(const std::string& what) : std::invalid_argument(what) {}
};

/** Thrown when a nonlinear or linear per-step solve fails (singular matrix,
 * stalled iteration). Carries a condition estimate when one is available
 * (NaN when it is not). */
class step_failure : public std::runtime_error {
  public:
    step_failure(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

/** Thrown by the reference solver when the state norm exceeds the blow-up
 * threshold. */
class divergence_error : public std::runtime_error {
  public:
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

/** Configuration parse or validation failure. line/column are 1-based;
 * column is 0 when only the line is known, and both are 0 for validation
 * errors that are not tied to a source location. */
class config_error : public std::runtime_error {
  public:
    config_error(const std::string& what, int line = 0, int column = 0)
        : std::runtime_error(what), line(line), column(column) {}
    int line;
    int column;
};

/** Filesystem failure while persisting or loading run artifacts. */
class io_error : public std::runtime_error {
  public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace epdiff

#endif
